use ndarray::{concatenate, Axis};
use serde::{Deserialize, Serialize};

use super::graph::{graph_weights, propagate, Bandwidth};
use super::smote::smote_generate;
use super::soft::SoftLabeledDataset;
use crate::dataset::{Dataset, POSITIVE};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GssConfig {
    /// SMOTE neighbor count.
    pub k: usize,
    pub sigma: Bandwidth,
    /// Synthetic samples are kept only when `f > p_delta`.
    pub p_delta: f64,
    /// Cap on generate/propagate/filter rounds.
    pub max_rounds: usize,
}

impl Default for GssConfig {
    fn default() -> Self {
        Self { k: 5, sigma: Bandwidth::Auto, p_delta: 0.5, max_rounds: 5 }
    }
}

impl GssConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("gss.k", "must be at least 1"));
        }
        if !(self.p_delta > 0.0 && self.p_delta < 1.0) {
            return Err(Error::invalid("gss.p_delta", format!("must lie in (0, 1), got {}", self.p_delta)));
        }
        if self.max_rounds == 0 {
            return Err(Error::invalid("gss.max_rounds", "must be at least 1"));
        }
        if let Bandwidth::Fixed(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("gss.sigma", format!("must be > 0 or \"auto\", got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GssStatus {
    /// Real plus retained positives reach the negative count.
    Balanced,
    /// Some samples retained but the round cap was hit first.
    Partial,
    /// Every candidate was rejected.
    NoneRetained,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GssOutcome {
    pub data: SoftLabeledDataset,
    pub status: GssStatus,
    pub generated: usize,
    pub retained: usize,
    pub rounds: usize,
}

/// Graph semi-supervised SMOTE.
///
/// Real rows keep one-hot labels. Each round draws `|S0| - |S1|` fresh SMOTE
/// candidates, solves the harmonic system over the real rows plus those
/// candidates, and keeps candidates with `f > p_delta` labelled `[1 - f, f]`.
/// Rounds stop once retained + real positives reach `|S0|` (extra retained
/// candidates beyond that are dropped) or after `max_rounds`.
pub fn gss_oversample(ds: &Dataset, config: &GssConfig, stream: &mut RandomStream) -> Result<GssOutcome> {
    config.validate()?;
    ds.require_both_classes(1)?;
    let (n_neg, n_pos) = ds.class_counts();
    let mut data = SoftLabeledDataset::from_hard(ds);
    let need = n_neg.saturating_sub(n_pos);
    if need == 0 {
        return Ok(GssOutcome { data, status: GssStatus::Balanced, generated: 0, retained: 0, rounds: 0 });
    }
    let x_pos = ds.class_features(POSITIVE);
    let f_n: Vec<f64> = ds.labels().iter().map(|&l| if l == POSITIVE { 1.0 } else { 0.0 }).collect();
    let n = ds.n_rows();
    let (mut generated, mut retained, mut rounds) = (0, 0, 0);
    while retained < need && rounds < config.max_rounds {
        rounds += 1;
        let batch = smote_generate(x_pos.view(), need, config.k, stream)?;
        generated += batch.len();
        let stacked = concatenate(Axis(0), &[ds.features().view(), batch.features.view()])
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let graph = graph_weights(stacked.view(), config.sigma)?;
        let f_m = propagate(&graph, &f_n, n)?;
        let keep: Vec<usize> = (0..f_m.len())
            .filter(|&u| f_m[u] > config.p_delta)
            .take(need - retained)
            .collect();
        let rows = batch.features.select(Axis(0), &keep);
        let f: Vec<f64> = keep.iter().map(|&u| f_m[u].min(1.0)).collect();
        data.push_synthetic(&rows, &f)?;
        retained += keep.len();
    }
    let status = if retained >= need {
        GssStatus::Balanced
    } else if retained > 0 {
        GssStatus::Partial
    } else {
        log::warn!("GSS retained none of {generated} synthetic samples after {rounds} rounds");
        GssStatus::NoneRetained
    };
    Ok(GssOutcome { data, status, generated, retained, rounds })
}

/// Plain SMOTE to full balance; synthetic rows get the hard positive label.
pub fn smote_oversample(ds: &Dataset, k: usize, stream: &mut RandomStream) -> Result<SoftLabeledDataset> {
    let (n_neg, n_pos) = ds.class_counts();
    let mut data = SoftLabeledDataset::from_hard(ds);
    let need = n_neg.saturating_sub(n_pos);
    if need > 0 {
        let batch = smote_generate(ds.class_features(POSITIVE).view(), need, k, stream)?;
        data.push_synthetic(&batch.features, &vec![1.0; need])?;
    }
    Ok(data)
}
