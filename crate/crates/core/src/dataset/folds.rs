use serde::{Deserialize, Serialize};

use super::{Dataset, NEGATIVE, POSITIVE};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Fold index for every row of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldSplit {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    /// `(train, test)` for one fold.
    pub fn split(&self, ds: &Dataset, fold: usize) -> Result<(Dataset, Dataset)> {
        if ds.n_rows() != self.assignments.len() {
            return Err(Error::DimensionMismatch(format!(
                "split covers {} rows, dataset has {}",
                self.assignments.len(),
                ds.n_rows()
            )));
        }
        if fold >= self.k {
            return Err(Error::invalid("fold", format!("{fold} out of range for k={}", self.k)));
        }
        Ok((ds.select(&self.train_rows(fold)), ds.select(&self.test_rows(fold))))
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled and dealt round-robin; the negative deal continues
/// where the positive deal stopped so fold sizes differ by at most one.
pub fn stratified_kfold(ds: &Dataset, k: usize, stream: &mut RandomStream) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::invalid("k", format!("need at least 2 folds, got {k}")));
    }
    ds.require_both_classes(k)?;
    let mut assignments = vec![0; ds.n_rows()];
    let mut next = 0;
    for class in [POSITIVE, NEGATIVE] {
        let mut members = ds.class_indices(class);
        stream.shuffle(&mut members);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldSplit { k, assignments })
}
