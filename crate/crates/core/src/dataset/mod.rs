//! Binary-labelled datasets and everything that produces or reshapes them.

mod csvio;
mod folds;
mod pca;
pub mod recipes;
mod scale;
mod synthetic;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, Matrix, RandomStream};

pub use csvio::{load_csv, write_csv, LabelColumn};
pub use folds::{stratified_kfold, FoldSplit};
pub use pca::{pca_reduce, Pca};
pub use scale::{apply_scaler, fit_scaler, ScalerParams};
pub use synthetic::{generate_synthetic, GenSpec};

/// Label of the negative (majority) class.
pub const NEGATIVE: u8 = 0;
/// Label of the positive (minority) class.
pub const POSITIVE: u8 = 1;

/// Feature matrix with binary hard labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    features: Matrix,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Matrix, labels: Vec<u8>) -> Result<Self> {
        let names = (1..=features.ncols()).map(|j| format!("f{j}")).collect();
        Self::with_feature_names(name, names, features, labels)
    }

    pub fn with_feature_names(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Matrix,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if let Some((row, v)) = labels.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(Error::LabelDomain { row, value: v.to_string() });
        }
        ensure_finite(features.iter(), "dataset features")?;
        Ok(Self { name: name.into(), feature_names, features, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_indices(&self, class: u8) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == class).map(|(i, _)| i).collect()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == POSITIVE).count();
        (self.labels.len() - pos, pos)
    }

    /// Negatives per positive; infinite when there are no positives.
    pub fn imbalance_ratio(&self) -> f64 {
        let (neg, pos) = self.class_counts();
        neg as f64 / pos as f64
    }

    /// Rows of one class as a matrix.
    pub fn class_features(&self, class: u8) -> Matrix {
        self.features.select(Axis(0), &self.class_indices(class))
    }

    /// New dataset made of the given rows, in the given order. Repeats are allowed.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Same labels and name, new features (e.g. after a projection).
    pub fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(self.name.clone(), features, self.labels.clone())
    }

    pub fn require_both_classes(&self, min_each: usize) -> Result<()> {
        let (neg, pos) = self.class_counts();
        if neg < min_each {
            return Err(Error::InsufficientClass { class: NEGATIVE, count: neg, required: min_each });
        }
        if pos < min_each {
            return Err(Error::InsufficientClass { class: POSITIVE, count: pos, required: min_each });
        }
        Ok(())
    }

    /// Stacks two datasets with the same columns.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.n_features() != other.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} and {} columns",
                self.n_features(),
                other.n_features()
            )));
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .expect("column counts checked");
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features,
            labels,
        })
    }
}

/// Summary used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n_negative: usize,
    pub n_positive: usize,
    pub dims: usize,
    pub imbalance_ratio: f64,
}

impl From<&Dataset> for DatasetInfo {
    fn from(ds: &Dataset) -> Self {
        let (n_negative, n_positive) = ds.class_counts();
        DatasetInfo {
            name: ds.name.clone(),
            n_negative,
            n_positive,
            dims: ds.n_features(),
            imbalance_ratio: ds.imbalance_ratio(),
        }
    }
}

/// Drops positives uniformly at random so that `|S0| / |S1| = ir` (rounded).
///
/// Negatives are untouched and the original row order is preserved.
pub fn subsample_to_ir(ds: &Dataset, ir: f64, stream: &mut RandomStream) -> Result<Dataset> {
    if !(ir.is_finite() && ir > 0.0) {
        return Err(Error::invalid("ir", format!("must be positive, got {ir}")));
    }
    let (neg, pos) = ds.class_counts();
    let target = (neg as f64 / ir).round() as usize;
    if target < 2 {
        return Err(Error::invalid(
            "ir",
            format!("{neg} negatives at IR {ir} leave {target} positives, need at least 2"),
        ));
    }
    if target > pos {
        return Err(Error::invalid(
            "ir",
            format!("IR {ir} needs {target} positives but only {pos} are available"),
        ));
    }
    let positives = ds.class_indices(POSITIVE);
    let mut keep = vec![false; ds.n_rows()];
    for i in ds.class_indices(NEGATIVE) {
        keep[i] = true;
    }
    for k in stream.sample_without_replacement(pos, target) {
        keep[positives[k]] = true;
    }
    let rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| keep[i]).collect();
    Ok(ds.select(&rows))
}

/// Uniformly subsamples one class down to `count` rows without replacement.
pub fn subsample_class(
    ds: &Dataset,
    class: u8,
    count: usize,
    stream: &mut RandomStream,
) -> Result<Dataset> {
    let members = ds.class_indices(class);
    if count > members.len() {
        return Err(Error::InsufficientClass { class, count: members.len(), required: count });
    }
    let mut keep = vec![true; ds.n_rows()];
    for &i in &members {
        keep[i] = false;
    }
    for k in stream.sample_without_replacement(members.len(), count) {
        keep[members[k]] = true;
    }
    let rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| keep[i]).collect();
    Ok(ds.select(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn counts_fixture(neg: usize, pos: usize) -> Dataset {
        let n = neg + pos;
        let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let mut y = vec![0u8; neg];
        y.extend(std::iter::repeat(1u8).take(pos));
        Dataset::new("fixture", x, y).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            Dataset::new("x", array![[1.0], [2.0]], vec![0, 2]),
            Err(Error::LabelDomain { row: 1, .. })
        ));
        assert!(Dataset::new("x", array![[f64::NAN]], vec![0]).is_err());
        assert!(Dataset::new("x", array![[1.0]], vec![0, 1]).is_err());
    }

    #[test]
    fn subsample_hits_target() {
        let ds = counts_fixture(2000, 500);
        let out = subsample_to_ir(&ds, 100.0, &mut RandomStream::new(1)).unwrap();
        assert_eq!(out.class_counts(), (2000, 20));
        // negatives are untouched and in order
        assert_eq!(out.class_features(NEGATIVE), ds.class_features(NEGATIVE));
    }

    #[test]
    fn subsample_at_current_ir_is_identity() {
        let ds = counts_fixture(100, 10);
        let out = subsample_to_ir(&ds, 10.0, &mut RandomStream::new(3)).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn subsample_errors() {
        let ds = counts_fixture(100, 10);
        assert!(subsample_to_ir(&ds, 80.0, &mut RandomStream::new(0)).is_err());
        assert!(subsample_to_ir(&ds, 5.0, &mut RandomStream::new(0)).is_err());
    }

    #[test]
    fn select_allows_repeats() {
        let ds = counts_fixture(3, 1);
        let s = ds.select(&[3, 3, 0]);
        assert_eq!(s.labels(), &[1, 1, 0]);
        assert_eq!(s.features().row(0), ds.features().row(3));
    }
}
