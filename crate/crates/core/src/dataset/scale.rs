use ndarray::{Array1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Per-feature z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

pub fn fit_scaler(ds: &Dataset) -> Result<ScalerParams> {
    let x = ds.features();
    if x.nrows() < 2 {
        return Err(Error::invalid("rows", format!("need at least 2 rows to fit, got {}", x.nrows())));
    }
    let mean: Array1<f64> = x.mean_axis(Axis(0)).expect("non-empty");
    let sd = x.std_axis(Axis(0), 0.0);
    Ok(ScalerParams { mean: mean.to_vec(), sd: sd.to_vec() })
}

pub fn apply_scaler(params: &ScalerParams, ds: &Dataset) -> Result<Dataset> {
    ds.with_features(params.transform(ds.features().view())?)
}

impl ScalerParams {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Zero-variance features map to 0.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Matrix> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "scaler fitted on {} features, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.sd[j]);
            if s > 0.0 {
                col.mapv_inplace(|v| (v - m) / s);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn two_point_hand_case() {
        let ds = Dataset::new("s", array![[0.0], [2.0]], vec![0, 1]).unwrap();
        let p = fit_scaler(&ds).unwrap();
        assert_eq!((p.mean[0], p.sd[0]), (1.0, 1.0));
        let out = apply_scaler(&p, &ds).unwrap();
        assert_eq!(out.features(), &array![[-1.0], [1.0]]);
    }

    #[test]
    fn constant_column_goes_to_zero() {
        let ds = Dataset::new("s", array![[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]], vec![0, 0, 1]).unwrap();
        let out = apply_scaler(&fit_scaler(&ds).unwrap(), &ds).unwrap();
        assert!(out.features().column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fitted_set_has_zero_means() {
        let x = Array2::from_shape_fn((37, 4), |(i, j)| ((i * 7 + j * 13) % 11) as f64 * 3.3 - 2.0);
        let ds = Dataset::new("s", x, vec![0; 37]).unwrap();
        let out = apply_scaler(&fit_scaler(&ds).unwrap(), &ds).unwrap();
        for m in out.features().mean_axis(Axis(0)).unwrap() {
            assert!(m.abs() <= 1e-9);
        }
    }

    #[test]
    fn needs_two_rows_and_matching_width() {
        let one = Dataset::new("s", array![[1.0]], vec![0]).unwrap();
        assert!(fit_scaler(&one).is_err());
        let p = ScalerParams { mean: vec![0.0, 0.0], sd: vec![1.0, 1.0] };
        assert!(p.transform(array![[1.0]].view()).is_err());
    }
}
