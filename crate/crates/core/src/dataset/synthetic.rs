use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{subsample_to_ir, Dataset};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

/// Distance between the two class means.
const MEAN_SEPARATION: f64 = 2.0;

/// Parameters of a synthetic two-class problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub dims: usize,
    pub n_negative: usize,
    pub imbalance_ratio: f64,
}

impl GenSpec {
    pub fn new(dims: usize, n_negative: usize, imbalance_ratio: f64) -> Self {
        Self { dims, n_negative, imbalance_ratio }
    }

    pub fn n_positive(&self) -> usize {
        (self.n_negative as f64 / self.imbalance_ratio).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::invalid("dims", "must be at least 1"));
        }
        if self.n_negative == 0 {
            return Err(Error::invalid("n_negative", "must be at least 1"));
        }
        if !(self.imbalance_ratio.is_finite() && self.imbalance_ratio > 1.0) {
            return Err(Error::invalid(
                "imbalance_ratio",
                format!("must be > 1, got {}", self.imbalance_ratio),
            ));
        }
        if self.n_positive() < 2 {
            return Err(Error::invalid(
                "imbalance_ratio",
                format!(
                    "{} negatives at IR {} leave fewer than 2 positives",
                    self.n_negative, self.imbalance_ratio
                ),
            ));
        }
        Ok(())
    }

    /// `D{dims}-n{n_negative}-IR{ir}`.
    pub fn label(&self) -> String {
        format!("D{}-n{}-IR{}", self.dims, self.n_negative, self.imbalance_ratio)
    }
}

/// Two unit-covariance Gaussian clouds whose means sit at `-u` and `+u` for a
/// random unit vector `u`. A balanced sample is drawn first and positives are
/// then removed at random until the requested imbalance ratio is reached.
pub fn generate_synthetic(spec: &GenSpec, stream: &mut RandomStream) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dims;
    let mut direction = Array1::zeros(d);
    loop {
        for v in direction.iter_mut() {
            *v = stream.normal(0.0, 1.0)?;
        }
        let norm = direction.dot(&direction).sqrt();
        if norm > 1e-12 {
            direction /= norm;
            break;
        }
    }
    let half = 0.5 * MEAN_SEPARATION;
    let n = 2 * spec.n_negative;
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = u8::from(i >= spec.n_negative);
        let sign = if label == 1 { half } else { -half };
        for j in 0..d {
            x[[i, j]] = sign * direction[j] + stream.normal(0.0, 1.0)?;
        }
        y.push(label);
    }
    let balanced = Dataset::new(spec.label(), x, y)?;
    subsample_to_ir(&balanced, spec.imbalance_ratio, stream)
}
