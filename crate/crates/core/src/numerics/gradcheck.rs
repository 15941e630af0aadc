use ndarray::Array2;

use crate::error::{Error, Result};

/// Central-difference gradient of a scalar function of a matrix.
///
/// Entry `(i, j)` is `(f(P + h E_ij) - f(P - h E_ij)) / 2h`.
pub fn finite_diff_grad<F>(f: F, p: &Array2<f64>, h: f64) -> Result<Array2<f64>>
where
    F: Fn(&Array2<f64>) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", format!("step must be positive, got {h}")));
    }
    let mut probe = p.clone();
    let mut grad = Array2::zeros(p.raw_dim());
    for ((i, j), g) in grad.indexed_iter_mut() {
        let orig = probe[[i, j]];
        probe[[i, j]] = orig + h;
        let plus = f(&probe);
        probe[[i, j]] = orig - h;
        let minus = f(&probe);
        probe[[i, j]] = orig;
        if !(plus.is_finite() && minus.is_finite()) {
            return Err(Error::NonFinite(format!("objective at probe ({i}, {j})")));
        }
        *g = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}
