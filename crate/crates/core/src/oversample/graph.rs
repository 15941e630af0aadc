use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{median, pairwise_sq_distances, solve_dd, upper_triangle, Matrix};

/// Gaussian kernel bandwidth: a fixed value or the median pairwise distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for Bandwidth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Auto => s.serialize_str("auto"),
            Bandwidth::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bandwidth::Fixed(v)),
            Raw::Text(t) if t == "auto" => Ok(Bandwidth::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bandwidth must be a number or \"auto\", got \"{t}\""))),
        }
    }
}

/// Dense Gaussian similarity graph over stacked labelled + unlabelled points.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    /// `w_ij = exp(-|x_i - x_j|^2 / sigma^2)` off the diagonal, 0 on it.
    pub w: Matrix,
    pub sigma: f64,
    /// Row sums of `w`.
    pub degree: Vec<f64>,
}

impl SimilarityGraph {
    pub fn n_nodes(&self) -> usize {
        self.degree.len()
    }
}

pub fn graph_weights(x_all: ArrayView2<'_, f64>, bandwidth: Bandwidth) -> Result<SimilarityGraph> {
    let n = x_all.nrows();
    if n < 2 {
        return Err(Error::invalid("nodes", format!("graph needs at least 2 points, got {n}")));
    }
    let dist = pairwise_sq_distances(x_all);
    let sigma = match bandwidth {
        Bandwidth::Fixed(s) => s,
        Bandwidth::Auto => {
            let d: Vec<f64> = upper_triangle(dist.view()).into_iter().map(f64::sqrt).collect();
            median(&d).unwrap_or(0.0)
        }
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("bandwidth must be positive, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let w = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { (-dist[[i, j]] / s2).exp() });
    let degree = w.rows().into_iter().map(|r| r.sum()).collect();
    Ok(SimilarityGraph { w, sigma, degree })
}

/// Harmonic extension of the labelled values to the unlabelled nodes:
/// `f_m = (D_mm - W_mm)^-1 W_mn f_n`, where the first `n` nodes are labelled.
pub fn propagate(graph: &SimilarityGraph, f_n: &[f64], n: usize) -> Result<Vec<f64>> {
    let total = graph.n_nodes();
    if f_n.len() != n || n > total {
        return Err(Error::DimensionMismatch(format!(
            "{} labelled values for n = {n} of {total} nodes",
            f_n.len()
        )));
    }
    let m = total - n;
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut a = Array2::zeros((m, m));
    let mut b = ndarray::Array1::zeros(m);
    for u in 0..m {
        let gu = n + u;
        for v in 0..m {
            a[[u, v]] = -graph.w[[gu, n + v]];
        }
        a[[u, u]] += graph.degree[gu];
        b[u] = (0..n).map(|l| graph.w[[gu, l]] * f_n[l]).sum();
    }
    let f_m = solve_dd(a.view(), b.view())?.to_vec();
    if n == 0 {
        return Ok(f_m);
    }
    // Harmonic values lie in the hull of the labelled values; clamp away rounding overshoot.
    let lo = f_n.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f_n.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(f_m.into_iter().map(|v| v.clamp(lo, hi)).collect())
}

/// `E(f) = 1/2 sum_ij w_ij (f_i - f_j)^2`.
pub fn energy(graph: &SimilarityGraph, f: &[f64]) -> f64 {
    let n = graph.n_nodes();
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = f[i] - f[j];
            e += graph.w[[i, j]] * d * d;
        }
    }
    0.5 * e
}
