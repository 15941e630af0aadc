use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::numerics::{pairwise_sq_distances, Matrix, RandomStream};

/// Synthetic samples with the provenance of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBatch {
    pub features: Matrix,
    /// Row of the seed sample in the positive matrix.
    pub seed_index: Vec<usize>,
    /// Row of the chosen neighbor in the positive matrix.
    pub neighbor_index: Vec<usize>,
    /// Interpolation factor: `row = seed + t * (neighbor - seed)`.
    pub t: Vec<f64>,
}

impl SyntheticBatch {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// For every row, the indices of its `k` nearest other rows (Euclidean),
/// nearest first, ties broken by index.
pub fn knn_table(x: ArrayView2<'_, f64>, k: usize) -> Vec<Vec<usize>> {
    let dist = pairwise_sq_distances(x);
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist[[i, a]].total_cmp(&dist[[i, b]]).then(a.cmp(&b)));
            others.truncate(k);
            others
        })
        .collect()
}

/// Draws `m` SMOTE samples from the positive rows `x_pos`.
///
/// Each sample picks a seed uniformly, one of the seed's `min(k, n-1)` nearest
/// positive neighbors uniformly, and `t ~ U[0, 1)`.
pub fn smote_generate(
    x_pos: ArrayView2<'_, f64>,
    m: usize,
    k: usize,
    stream: &mut RandomStream,
) -> Result<SyntheticBatch> {
    let n = x_pos.nrows();
    if n < 2 {
        return Err(Error::InsufficientClass { class: 1, count: n, required: 2 });
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let k_eff = k.min(n - 1);
    let knn = knn_table(x_pos, k_eff);
    let mut features = Array2::zeros((m, x_pos.ncols()));
    let mut seed_index = Vec::with_capacity(m);
    let mut neighbor_index = Vec::with_capacity(m);
    let mut ts = Vec::with_capacity(m);
    for mut row in features.rows_mut() {
        let seed = stream.index(n);
        let nb = knn[seed][stream.index(k_eff)];
        let t = stream.next_f64();
        let (xs, xn) = (x_pos.row(seed), x_pos.row(nb));
        for (j, v) in row.iter_mut().enumerate() {
            *v = xs[j] + t * (xn[j] - xs[j]);
        }
        seed_index.push(seed);
        neighbor_index.push(nb);
        ts.push(t);
    }
    Ok(SyntheticBatch { features, seed_index, neighbor_index, t: ts })
}
