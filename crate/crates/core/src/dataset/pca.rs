use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigen, Matrix, RandomStream};

/// Above this input width, a randomized range finder replaces the full
/// covariance eigen-decomposition when only a few components are wanted.
const RANDOMIZED_MIN_DIMS: usize = 500;
const OVERSAMPLE: usize = 10;
const POWER_ITERS: usize = 4;

/// Principal-component projection: `x -> (x - mean) * basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `D x d`, orthonormal columns ordered by decreasing variance.
    pub basis: Matrix,
    /// Variance captured by each retained component.
    pub variances: Vec<f64>,
}

impl Pca {
    pub fn fit(x: ArrayView2<'_, f64>, d: usize) -> Result<Pca> {
        let (n, dims) = x.dim();
        if d == 0 || d > dims {
            return Err(Error::invalid("d", format!("need 1 <= d <= {dims}, got {d}")));
        }
        if n < 2 {
            return Err(Error::invalid("rows", format!("need at least 2 rows, got {n}")));
        }
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let centered = &x - &mean;
        let (variances, mut basis) = if dims > RANDOMIZED_MIN_DIMS && d + OVERSAMPLE < dims / 2 {
            randomized_components(centered.view(), d)?
        } else {
            let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
            let (vals, vecs) = symmetric_eigen(cov.view())?;
            (vals.slice(s![..d]).to_owned(), vecs.slice(s![.., ..d]).to_owned())
        };
        fix_signs(&mut basis);
        Ok(Pca {
            mean: mean.to_vec(),
            basis,
            variances: variances.iter().map(|v| v.max(0.0)).collect(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.basis.ncols()
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Matrix> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "PCA fitted on {} features, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mean = Array1::from(self.mean.clone());
        Ok((&x - &mean).dot(&self.basis))
    }

    pub fn inverse_transform(&self, z: ArrayView2<'_, f64>) -> Matrix {
        z.dot(&self.basis.t()) + &Array1::from(self.mean.clone())
    }
}

/// Projects a dataset onto its top `d` principal components.
pub fn pca_reduce(ds: &Dataset, d: usize) -> Result<(Dataset, Pca)> {
    let pca = Pca::fit(ds.features().view(), d)?;
    let reduced = pca.transform(ds.features().view())?;
    Ok((ds.with_features(reduced)?, pca))
}

/// Largest-magnitude entry of every column made positive.
fn fix_signs(basis: &mut Matrix) {
    for mut col in basis.axis_iter_mut(Axis(1)) {
        let pivot = col.iter().copied().fold(0.0_f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

fn orthonormalize_columns(m: &mut Matrix) {
    for _ in 0..2 {
        for j in 0..m.ncols() {
            for k in 0..j {
                let proj = m.column(j).dot(&m.column(k));
                let ck = m.column(k).to_owned();
                m.column_mut(j).scaled_add(-proj, &ck);
            }
            let norm = m.column(j).dot(&m.column(j)).sqrt();
            if norm > 1e-300 {
                m.column_mut(j).mapv_inplace(|v| v / norm);
            }
        }
    }
}

/// Randomized subspace iteration for the top `d` right singular vectors.
fn randomized_components(centered: ArrayView2<'_, f64>, d: usize) -> Result<(Array1<f64>, Matrix)> {
    let (n, dims) = centered.dim();
    let l = (d + OVERSAMPLE).min(dims).min(n);
    let mut stream = RandomStream::new(0x9ca5_eed0);
    let mut omega = Array2::zeros((dims, l));
    for v in omega.iter_mut() {
        *v = stream.normal(0.0, 1.0)?;
    }
    let mut q = centered.dot(&omega);
    orthonormalize_columns(&mut q);
    for _ in 0..POWER_ITERS {
        let mut z = centered.t().dot(&q);
        orthonormalize_columns(&mut z);
        q = centered.dot(&z);
        orthonormalize_columns(&mut q);
    }
    let b = q.t().dot(&centered);
    let small = b.dot(&b.t());
    let (vals, vecs) = symmetric_eigen(small.view())?;
    let mut basis = Array2::zeros((dims, d));
    for c in 0..d {
        let sigma = vals[c].max(0.0).sqrt();
        let v = b.t().dot(&vecs.column(c));
        if sigma > 1e-300 {
            basis.column_mut(c).assign(&(v / sigma));
        }
    }
    let variances = vals.slice(s![..d]).mapv(|v| v / (n as f64 - 1.0));
    Ok((variances, basis))
}
