//! Cost-sensitive neighborhood components analysis.
//!
//! Learns a linear map `x -> P x` (`P` is `d x D`) that maximizes the
//! cost-weighted leave-one-out accuracy of a stochastic nearest-neighbor
//! classifier in the projected space:
//!
//! ```text
//! r_ij = exp(-|P(x_i - x_j)|^2)   if |P(x_i - x_j)|^2 <= delta^2 and i != j, else 0
//! p_ij = r_ij / sum_l r_il
//! Q    = sum_{i in S0} sum_{j in Omega_i} p_ij + c * sum_{i in S1} sum_{j in Omega_i} p_ij
//! ```
//!
//! where `Omega_i` holds the samples sharing `i`'s label. The gradient is
//! `2 P X^T (g(H) - H - H^T) X` with `h_ij = p_i p_ij - q_ij` and `g(H)` the
//! diagonal of column sums of `H`.

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Pca, POSITIVE};
use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, median, pairwise_sq_distances, upper_triangle, Matrix, RandomStream};

/// Maximum number of step halvings tried per iteration.
pub const MAX_HALVINGS: usize = 20;

/// `d x D` projection defining the metric `M = P^T P` on input space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatrix(Matrix);

impl ProjectionMatrix {
    pub fn new(p: Matrix) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty("projection matrix".into()));
        }
        ensure_finite(p.iter(), "projection matrix")?;
        Ok(Self(p))
    }

    pub fn identity(dims: usize) -> Self {
        Self(Array2::eye(dims))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn target_dims(&self) -> usize {
        self.0.nrows()
    }

    pub fn input_dims(&self) -> usize {
        self.0.ncols()
    }

    /// `X P^T`: one projected row per input row.
    pub fn project(&self, x: ArrayView2<'_, f64>) -> Result<Matrix> {
        project(&self.0, x)
    }

    pub fn project_dataset(&self, ds: &Dataset) -> Result<Dataset> {
        ds.with_features(self.project(ds.features().view())?)
    }

    /// Squared distance between two input points under the learned metric.
    pub fn metric_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff = ndarray::Array1::from_iter(a.iter().zip(b).map(|(x, y)| x - y));
        let z = self.0.dot(&diff);
        z.dot(&z)
    }

    /// Headerless CSV, `d` rows of `D` values.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for row in self.0.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<projection writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    c.parse::<f64>().map_err(|_| Error::Parse {
                        row: r + 1,
                        column: (j + 1).to_string(),
                        message: format!("`{c}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let d = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Array2::from_shape_vec((d, cols), flat)
            .map_err(|_| Error::Format("projection CSV rows have unequal lengths".into()))?;
        Self::new(m)
    }
}

/// `X P^T`.
pub fn project(p: &Matrix, x: ArrayView2<'_, f64>) -> Result<Matrix> {
    if x.ncols() != p.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "projection expects {} features, got {}",
            p.ncols(),
            x.ncols()
        )));
    }
    Ok(x.dot(&p.t()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    #[default]
    Pca,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CsNcaConfig {
    /// Target dimensionality.
    pub d: usize,
    /// Positive-class weight; `None` uses the training imbalance ratio.
    pub c: Option<f64>,
    /// Neighborhood radius; `None` uses the median projected pairwise
    /// distance at initialization.
    pub delta: Option<f64>,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub init: Init,
    pub seed: u64,
}

impl Default for CsNcaConfig {
    fn default() -> Self {
        Self { d: 10, c: None, delta: None, learning_rate: 0.05, max_iters: 200, init: Init::Pca, seed: 0 }
    }
}

impl CsNcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("csnca.d", "must be at least 1"));
        }
        if let Some(c) = self.c {
            if !(c.is_finite() && c >= 1.0) {
                return Err(Error::invalid("csnca.c", format!("must be >= 1, got {c}")));
            }
        }
        if let Some(delta) = self.delta {
            if !(delta.is_finite() && delta > 0.0) {
                return Err(Error::invalid("csnca.delta", format!("must be > 0, got {delta}")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid(
                "csnca.learning_rate",
                format!("must be > 0, got {}", self.learning_rate),
            ));
        }
        Ok(())
    }
}

/// Unnormalized affinities `r` and row-normalized neighbor probabilities `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborProbs {
    pub p: Matrix,
    pub r: Matrix,
}

/// Neighbor probabilities of the rows of `x` under projection `p`.
pub fn neighbor_probs(p: &Matrix, x: ArrayView2<'_, f64>, delta: f64) -> Result<NeighborProbs> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
    }
    let z = project(p, x)?;
    probs_from_projected(z.view(), delta)
}

fn probs_from_projected(z: ArrayView2<'_, f64>, delta: f64) -> Result<NeighborProbs> {
    let dist = pairwise_sq_distances(z);
    ensure_finite(dist.iter(), "projected distances")?;
    let radius = delta * delta;
    let n = dist.nrows();
    let mut r = Array2::zeros((n, n));
    for ((i, j), v) in r.indexed_iter_mut() {
        let d = dist[[i, j]];
        if i != j && d <= radius {
            *v = (-d).exp();
        }
    }
    let mut p = r.clone();
    for mut row in p.axis_iter_mut(Axis(0)) {
        let total: f64 = row.sum();
        if total > 0.0 {
            row.mapv_inplace(|v| v / total);
        }
    }
    Ok(NeighborProbs { p, r })
}

fn class_weights(labels: &[u8], c: f64) -> Vec<f64> {
    labels.iter().map(|&l| if l == POSITIVE { c } else { 1.0 }).collect()
}

fn check_inputs(p: &Matrix, ds: &Dataset, c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("c", format!("must be positive, got {c}")));
    }
    if p.ncols() != ds.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "projection has {} columns, dataset has {} features",
            p.ncols(),
            ds.n_features()
        )));
    }
    Ok(())
}

/// Cost-weighted leave-one-out objective `Q`.
pub fn objective(p: &Matrix, ds: &Dataset, c: f64, delta: f64) -> Result<f64> {
    check_inputs(p, ds, c)?;
    let probs = neighbor_probs(p, ds.features().view(), delta)?;
    Ok(objective_from_probs(&probs.p, ds.labels(), c))
}

fn objective_from_probs(p: &Matrix, labels: &[u8], c: f64) -> f64 {
    let w = class_weights(labels, c);
    let mut q = 0.0;
    for (i, row) in p.axis_iter(Axis(0)).enumerate() {
        let same: f64 = row.iter().zip(labels).filter(|(_, &l)| l == labels[i]).map(|(v, _)| v).sum();
        q += w[i] * same;
    }
    q
}

/// `h_ij = p_i p_ij - q_ij`. Every row of `H` sums to zero.
pub fn h_matrix(p: &Matrix, labels: &[u8], c: f64) -> Matrix {
    let w = class_weights(labels, c);
    let n = labels.len();
    let mut h = Array2::zeros((n, n));
    for i in 0..n {
        let same: f64 = (0..n).filter(|&j| labels[j] == labels[i]).map(|j| p[[i, j]]).sum();
        let p_i = w[i] * same;
        for j in 0..n {
            let q_ij = if labels[j] == labels[i] { w[i] * p[[i, j]] } else { 0.0 };
            h[[i, j]] = p_i * p[[i, j]] - q_ij;
        }
    }
    h
}

/// `dQ/dP = 2 P X^T (g(H) - H - H^T) X`.
pub fn gradient(p: &Matrix, ds: &Dataset, c: f64, delta: f64) -> Result<Matrix> {
    check_inputs(p, ds, c)?;
    let x = ds.features();
    let z = project(p, x.view())?;
    let probs = probs_from_projected(z.view(), delta)?;
    Ok(gradient_from_probs(&probs.p, z.view(), x.view(), ds.labels(), c))
}

fn gradient_from_probs(p: &Matrix, z: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>, labels: &[u8], c: f64) -> Matrix {
    let h = h_matrix(p, labels, c);
    let col_sums = h.sum_axis(Axis(0));
    let mut g = -(&h + &h.t());
    for (i, s) in col_sums.iter().enumerate() {
        g[[i, i]] += s;
    }
    // P X^T = Z^T
    z.t().dot(&g.dot(&x)) * 2.0
}

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsNcaFit {
    pub projection: ProjectionMatrix,
    pub initial: ProjectionMatrix,
    pub c: f64,
    pub delta: f64,
    pub q_initial: f64,
    pub q_final: f64,
    pub iterations: usize,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

/// Initial projection for a dataset: top principal directions, or random
/// orthonormal rows.
pub fn initial_projection(ds: &Dataset, d: usize, init: Init, seed: u64) -> Result<Matrix> {
    let dims = ds.n_features();
    if d > dims {
        return Err(Error::invalid("csnca.d", format!("target {d} exceeds input dimension {dims}")));
    }
    match init {
        Init::Pca => Ok(Pca::fit(ds.features().view(), d)?.basis.t().to_owned()),
        Init::Random => {
            let mut stream = RandomStream::new(seed);
            let mut m = Array2::zeros((dims, d));
            for v in m.iter_mut() {
                *v = stream.normal(0.0, 1.0)?;
            }
            // Gram-Schmidt on the columns, then transpose to rows.
            for j in 0..d {
                for k in 0..j {
                    let proj = m.column(j).dot(&m.column(k));
                    let ck = m.column(k).to_owned();
                    m.column_mut(j).scaled_add(-proj, &ck);
                }
                let norm = m.column(j).dot(&m.column(j)).sqrt();
                m.column_mut(j).mapv_inplace(|v| v / norm);
            }
            Ok(m.t().to_owned())
        }
    }
}

/// Median pairwise distance of the rows of `x` under projection `p`.
pub fn median_projected_distance(p: &Matrix, x: ArrayView2<'_, f64>) -> Result<f64> {
    let z = project(p, x)?;
    let d: Vec<f64> = upper_triangle(pairwise_sq_distances(z.view()).view()).into_iter().map(f64::sqrt).collect();
    let med = median(&d).ok_or_else(|| Error::Empty("need at least 2 rows for a distance".into()))?;
    if med > 0.0 {
        return Ok(med);
    }
    // Mostly duplicated rows: fall back to the smallest positive distance.
    d.into_iter()
        .filter(|&v| v > 0.0)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::invalid("delta", "all projected points coincide"))
}

/// Full-batch gradient ascent on `Q` with step halving.
///
/// Each iteration tries `P + lr * grad` and halves the step (at most
/// [`MAX_HALVINGS`] times) until `Q` does not decrease. The iterate with the
/// highest `Q` is returned, so `q_final >= q_initial`.
pub fn fit(ds: &Dataset, config: &CsNcaConfig) -> Result<CsNcaFit> {
    config.validate()?;
    ds.require_both_classes(1)?;
    let x = ds.features();
    let c = config.c.unwrap_or_else(|| ds.imbalance_ratio().max(1.0));
    let p0 = initial_projection(ds, config.d, config.init, config.seed)?;
    let delta = match config.delta {
        Some(d) => d,
        None => median_projected_distance(&p0, x.view())?,
    };

    let eval = |p: &Matrix| -> Result<(f64, Matrix)> {
        let z = project(p, x.view())?;
        let probs = probs_from_projected(z.view(), delta)?;
        let q = objective_from_probs(&probs.p, ds.labels(), c);
        Ok((q, z))
    };

    let (q0, mut z) = eval(&p0)?;
    if !q0.is_finite() {
        return Err(Error::Divergence("objective is not finite at initialization".into()));
    }
    let mut p = p0.clone();
    let mut q = q0;
    let mut trace = vec![q0];
    let mut iterations = 0;
    for _ in 0..config.max_iters {
        let probs = probs_from_projected(z.view(), delta)?;
        let grad = gradient_from_probs(&probs.p, z.view(), x.view(), ds.labels(), c);
        if grad.iter().all(|&g| g == 0.0) {
            break;
        }
        let mut step = config.learning_rate;
        let mut accepted = None;
        let mut last_finite = true;
        for _ in 0..=MAX_HALVINGS {
            let candidate = &p + &(&grad * step);
            match eval(&candidate) {
                Ok((qc, zc)) if qc.is_finite() => {
                    last_finite = true;
                    if qc >= q {
                        accepted = Some((candidate, qc, zc));
                        break;
                    }
                }
                Ok(_) | Err(Error::NonFinite(_)) => last_finite = false,
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        match accepted {
            Some((pc, qc, zc)) => {
                let stalled = qc == q;
                p = pc;
                q = qc;
                z = zc;
                trace.push(q);
                iterations += 1;
                if stalled {
                    break;
                }
            }
            None if !last_finite => {
                return Err(Error::Divergence(format!(
                    "objective not finite after {MAX_HALVINGS} step halvings at iteration {iterations}"
                )))
            }
            None => break,
        }
    }
    Ok(CsNcaFit {
        projection: ProjectionMatrix::new(p)?,
        initial: ProjectionMatrix::new(p0)?,
        c,
        delta,
        q_initial: q0,
        q_final: q,
        iterations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_grad;
    use ndarray::{array, Array1};

    fn random_fixture(n: usize, dims: usize, seed: u64) -> Dataset {
        let mut s = RandomStream::new(seed);
        let x = Array2::from_shape_fn((n, dims), |_| s.normal(0.0, 1.0).unwrap());
        let mut y: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 0)).collect();
        y[1] = 0;
        Dataset::new("fx", x, y).unwrap()
    }

    fn random_p(d: usize, dims: usize, seed: u64) -> Matrix {
        let mut s = RandomStream::new(seed);
        Array2::from_shape_fn((d, dims), |_| s.normal(0.0, 0.5).unwrap())
    }

    /// Direct double loop over the definition of Q.
    fn naive_objective(p: &Matrix, ds: &Dataset, c: f64, delta: f64) -> f64 {
        let x = ds.features();
        let y = ds.labels();
        let n = ds.n_rows();
        let mut q = 0.0;
        for i in 0..n {
            let mut r = vec![0.0; n];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff = &x.row(i) - &x.row(j);
                let zd = p.dot(&diff);
                let dm = zd.dot(&zd);
                if dm <= delta * delta {
                    r[j] = (-dm).exp();
                }
            }
            let total: f64 = r.iter().sum();
            if total == 0.0 {
                continue;
            }
            let pi: f64 = (0..n).filter(|&j| y[j] == y[i]).map(|j| r[j] / total).sum();
            q += if y[i] == 1 { c * pi } else { pi };
        }
        q
    }

    /// Per-pair accumulation of dp_ij/dP over same-class pairs.
    fn naive_gradient(p: &Matrix, ds: &Dataset, c: f64, delta: f64) -> Matrix {
        let probs = neighbor_probs(p, ds.features().view(), delta).unwrap().p;
        let x = ds.features();
        let y = ds.labels();
        let n = ds.n_rows();
        let outer = |i: usize, j: usize| -> Matrix {
            let d: Array1<f64> = &x.row(i) - &x.row(j);
            let col = d.view().insert_axis(Axis(1));
            col.dot(&col.t())
        };
        let mut total: Matrix = Array2::zeros((x.ncols(), x.ncols()));
        for i in 0..n {
            let w = if y[i] == 1 { c } else { 1.0 };
            let mut expect: Matrix = Array2::zeros((x.ncols(), x.ncols()));
            for l in 0..n {
                if probs[[i, l]] > 0.0 {
                    expect = expect + outer(i, l) * probs[[i, l]];
                }
            }
            for j in 0..n {
                if y[j] == y[i] && probs[[i, j]] > 0.0 {
                    total = total + (&outer(i, j) - &expect) * (-2.0 * w * probs[[i, j]]);
                }
            }
        }
        p.dot(&total)
    }

    fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
        let num = (a - b).mapv(|v| v * v).sum().sqrt();
        let den = b.mapv(|v| v * v).sum().sqrt().max(1e-300);
        num / den
    }

    #[test]
    fn coincident_points() {
        let x = array![[1.0, 2.0], [1.0, 2.0]];
        let probs = neighbor_probs(&Array2::eye(2), x.view(), 10.0).unwrap();
        assert_eq!(probs.r[[0, 1]], 1.0);
        assert_eq!(probs.p[[0, 1]], 1.0);
        assert_eq!(probs.r[[0, 0]], 0.0);
    }

    #[test]
    fn outside_radius_is_zero() {
        let x = array![[0.0], [3.0], [0.5]];
        let probs = neighbor_probs(&Array2::eye(1), x.view(), 1.0).unwrap();
        assert_eq!(probs.r[[0, 1]], 0.0);
        assert!(probs.r[[0, 2]] > 0.0);
        // row 1 is isolated
        assert!(probs.p.row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let x = array![[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let probs = neighbor_probs(&Array2::eye(2), x.view(), 5.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert!((probs.p[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn objective_matches_naive_loop() {
        let ds = random_fixture(10, 3, 1);
        let p = random_p(2, 3, 2);
        for &(c, delta) in &[(1.0, 10.0), (3.0, 1.5), (7.5, 0.9)] {
            let q = objective(&p, &ds, c, delta).unwrap();
            assert!((q - naive_objective(&p, &ds, c, delta)).abs() <= 1e-10);
        }
    }

    #[test]
    fn single_positive_contributes_nothing() {
        let x = array![[0.0], [0.3], [0.7], [1.0]];
        let ds = Dataset::new("one", x, vec![0, 0, 0, 1]).unwrap();
        let p = Array2::eye(1);
        let q1 = objective(&p, &ds, 1.0, 10.0).unwrap();
        let q9 = objective(&p, &ds, 9.0, 10.0).unwrap();
        assert_eq!(q1, q9);
    }

    #[test]
    fn h_rows_sum_to_zero() {
        for seed in 0..10 {
            let ds = random_fixture(25, 5, seed);
            let p = random_p(2, 5, seed + 100);
            let probs = neighbor_probs(&p, ds.features().view(), 1.2).unwrap();
            let h = h_matrix(&probs.p, ds.labels(), 3.0);
            for s in h.sum_axis(Axis(1)) {
                assert!(s.abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ds = random_fixture(30, 6, 3);
        let p = random_p(2, 6, 4);
        let delta = 2.0;
        let g = gradient(&p, &ds, 3.0, delta).unwrap();
        let fd = finite_diff_grad(|m| objective(m, &ds, 3.0, delta).unwrap(), &p, 1e-5).unwrap();
        assert!(rel_err(&g, &fd) <= 1e-4, "rel err {}", rel_err(&g, &fd));
    }

    #[test]
    fn gradient_matches_per_pair_loop() {
        let ds = random_fixture(12, 4, 5);
        let p = random_p(3, 4, 6);
        for &c in &[1.0, 4.0] {
            let g = gradient(&p, &ds, c, 1.8).unwrap();
            let naive = naive_gradient(&p, &ds, c, 1.8);
            assert!(rel_err(&g, &naive) <= 1e-10);
        }
    }

    #[test]
    fn objective_is_permutation_invariant() {
        let ds = random_fixture(15, 3, 7);
        let p = random_p(2, 3, 8);
        let mut order: Vec<usize> = (0..15).collect();
        RandomStream::new(9).shuffle(&mut order);
        let a = objective(&p, &ds, 2.0, 1.5).unwrap();
        let b = objective(&p, &ds.select(&order), 2.0, 1.5).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn project_cases() {
        let x = array![[1.0, -2.0], [0.5, 4.0]];
        assert_eq!(project(&Array2::eye(2), x.view()).unwrap(), x);
        assert!(project(&Array2::zeros((1, 2)), x.view()).unwrap().iter().all(|&v| v == 0.0));
        assert!(project(&Array2::eye(3), x.view()).is_err());
        let p = ProjectionMatrix::new(random_p(2, 2, 1)).unwrap();
        let z = p.project(x.view()).unwrap();
        let dz = &z.row(0) - &z.row(1);
        let direct = p.metric_distance(&[1.0, -2.0], &[0.5, 4.0]);
        assert!((dz.dot(&dz) - direct).abs() <= 1e-10);
    }

    #[test]
    fn zero_iterations_returns_init() {
        let ds = random_fixture(20, 4, 11);
        let cfg = CsNcaConfig { d: 2, max_iters: 0, ..Default::default() };
        let out = fit(&ds, &cfg).unwrap();
        assert_eq!(out.projection, out.initial);
        assert_eq!(out.q_final, out.q_initial);
    }

    #[test]
    fn fit_is_deterministic_and_monotone() {
        let ds = random_fixture(30, 5, 12);
        for init in [Init::Pca, Init::Random] {
            let cfg = CsNcaConfig { d: 2, max_iters: 40, init, seed: 3, ..Default::default() };
            let a = fit(&ds, &cfg).unwrap();
            let b = fit(&ds, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(a.q_final >= a.q_initial);
            assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn projection_csv_round_trip() {
        let p = ProjectionMatrix::new(random_p(2, 3, 5)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(ProjectionMatrix::read_csv(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn config_validation() {
        assert!(CsNcaConfig { d: 0, ..Default::default() }.validate().is_err());
        assert!(CsNcaConfig { c: Some(0.5), ..Default::default() }.validate().is_err());
        assert!(CsNcaConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        let ds = random_fixture(10, 3, 1);
        assert!(fit(&ds, &CsNcaConfig { d: 4, ..Default::default() }).is_err());
    }
}
