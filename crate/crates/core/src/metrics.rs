//! Confusion counts, F-measure / G-mean / F+G, and mean-rank tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// Class-swapped matrix: positives become negatives.
    pub fn swapped(&self) -> Self {
        Self { tp: self.tn, fn_: self.fp, fp: self.fn_, tn: self.tp }
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: Self) -> Self {
        Self { tp: self.tp + o.tp, fn_: self.fn_ + o.fn_, fp: self.fp + o.fp, tn: self.tn + o.tn }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub f_measure: f64,
    pub g_mean: f64,
    pub f_plus_g: f64,
}

/// Metric selector used by rank tables and charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FMeasure,
    GMean,
    FPlusG,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::FMeasure, Metric::GMean, Metric::FPlusG];

    pub fn name(self) -> &'static str {
        match self {
            Metric::FMeasure => "f_measure",
            Metric::GMean => "g_mean",
            Metric::FPlusG => "f_plus_g",
        }
    }

    pub fn of(self, m: &MetricSet) -> f64 {
        match self {
            Metric::FMeasure => m.f_measure,
            Metric::GMean => m.g_mean,
            Metric::FPlusG => m.f_plus_g,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f_measure" | "f" => Ok(Metric::FMeasure),
            "g_mean" | "g" => Ok(Metric::GMean),
            "f_plus_g" | "fg" => Ok(Metric::FPlusG),
            _ => Err(Error::Unknown { kind: "metric", name: s.to_string() }),
        }
    }
}

/// Counts outcomes; label 1 is the positive class.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (row, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            _ => {
                let bad = if t > 1 { t } else { p };
                return Err(Error::LabelDomain { row, value: bad.to_string() });
            }
        }
    }
    Ok(cm)
}

/// F = 2tp / (2tp + fn + fp), G = sqrt(recall * specificity).
///
/// F is 0 when its denominator vanishes.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricSet> {
    if cm.positives() == 0 {
        return Err(Error::Empty("evaluation set has no positive samples".into()));
    }
    if cm.negatives() == 0 {
        return Err(Error::Empty("evaluation set has no negative samples".into()));
    }
    let (tp, fn_, fp, tn) = (cm.tp as f64, cm.fn_ as f64, cm.fp as f64, cm.tn as f64);
    let denom = 2.0 * tp + fn_ + fp;
    let f_measure = if denom > 0.0 { 2.0 * tp / denom } else { 0.0 };
    let g_mean = (tp / (tp + fn_) * (tn / (tn + fp))).sqrt();
    Ok(MetricSet { f_measure, g_mean, f_plus_g: f_measure + g_mean })
}

/// Mean rank of each method across datasets for one metric (lower is better).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub mean_ranks: Vec<f64>,
    /// `ranks[m][d]`: rank of method `m` on dataset `d`.
    pub ranks: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn mean_rank_of(&self, method: &str) -> Option<f64> {
        self.methods.iter().position(|m| m == method).map(|i| self.mean_ranks[i])
    }
}

/// Ranks methods per dataset by descending score, averaging ranks over ties,
/// then averages each method's ranks over datasets.
///
/// `scores[m][d]` is the score of method `m` on dataset `d`.
pub fn mean_rank(methods: &[String], scores: &[Vec<f64>]) -> Result<RankTable> {
    if methods.is_empty() || scores.is_empty() || scores[0].is_empty() {
        return Err(Error::Empty("rank table has no cells".into()));
    }
    if methods.len() != scores.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} methods but {} score rows",
            methods.len(),
            scores.len()
        )));
    }
    let n_data = scores[0].len();
    if scores.iter().any(|row| row.len() != n_data) {
        return Err(Error::DimensionMismatch("ragged score table".into()));
    }
    if scores.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("score table has missing or non-finite cells".into()));
    }
    let m = methods.len();
    let mut ranks = vec![vec![0.0; n_data]; m];
    for d in 0..n_data {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| scores[b][d].total_cmp(&scores[a][d]));
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && scores[order[end]][d] == scores[order[start]][d] {
                end += 1;
            }
            // positions start..end share ranks start+1..=end
            let avg = (start + 1 + end) as f64 / 2.0;
            for &k in &order[start..end] {
                ranks[k][d] = avg;
            }
            start = end;
        }
    }
    let mean_ranks = ranks.iter().map(|r| r.iter().sum::<f64>() / n_data as f64).collect();
    Ok(RankTable { methods: methods.to_vec(), mean_ranks, ranks })
}
