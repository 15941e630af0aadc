use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, confusion};
use crate::numerics::{ensure_finite, Matrix, RandomStream, Vector};
use crate::oversample::SoftLabeledDataset;

/// Shape of the shared-trunk network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkArch {
    pub input_dim: usize,
    /// Widths of the shared rectifier layers.
    pub trunk: Vec<usize>,
    /// Number of output heads.
    pub heads: usize,
    /// Width of each head's rectifier layer, followed by a 2-way softmax.
    pub head_hidden: usize,
}

impl NetworkArch {
    /// One trunk layer of width `max(16, 2 * input_dim)`, heads of width 8.
    pub fn default_for(input_dim: usize, heads: usize) -> Self {
        Self { input_dim, trunk: vec![16.max(2 * input_dim)], heads, head_hidden: 8 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("arch.input_dim", "must be at least 1"));
        }
        if self.heads == 0 {
            return Err(Error::invalid("arch.heads", "need at least one head"));
        }
        if self.head_hidden == 0 || self.trunk.iter().any(|&w| w == 0) {
            return Err(Error::invalid("arch", "layer widths must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, learning_rate: 0.01, batch_size: 32, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("train.learning_rate", format!("must be > 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("train.batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Fully connected layer `y = x W + b`, `W` is `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Matrix,
    pub b: Vector,
}

impl Dense {
    fn init(inputs: usize, outputs: usize, stream: &mut RandomStream) -> Result<Self> {
        let scale = 1.0 / (inputs as f64).sqrt();
        let mut w = Array2::zeros((inputs, outputs));
        for v in w.iter_mut() {
            *v = stream.uniform(-scale, scale)?;
        }
        Ok(Self { w, b: Array1::zeros(outputs) })
    }

    fn forward(&self, x: ArrayView2<'_, f64>) -> Matrix {
        x.dot(&self.w) + &self.b
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

/// Shared trunk, `K` heads, and the per-head ensemble weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub arch: NetworkArch,
    pub trunk: Vec<Dense>,
    /// `heads[j]` = hidden layer, then the 2-unit output layer.
    pub heads: Vec<Vec<Dense>>,
    pub head_weights: Vec<f64>,
}

/// Builds a freshly initialized network with uniform head weights.
pub fn build_network(arch: &NetworkArch, stream: &mut RandomStream) -> Result<EnsembleModel> {
    arch.validate()?;
    let mut trunk = Vec::with_capacity(arch.trunk.len());
    let mut width = arch.input_dim;
    for &w in &arch.trunk {
        trunk.push(Dense::init(width, w, stream)?);
        width = w;
    }
    let heads = (0..arch.heads)
        .map(|_| Ok(vec![Dense::init(width, arch.head_hidden, stream)?, Dense::init(arch.head_hidden, 2, stream)?]))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        arch: arch.clone(),
        trunk,
        heads,
        head_weights: vec![1.0 / arch.heads as f64; arch.heads],
    })
}

fn relu_inplace(m: &mut Matrix) {
    m.mapv_inplace(|v| v.max(0.0));
}

/// Row-wise log-softmax.
fn log_softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

impl EnsembleModel {
    pub fn n_heads(&self) -> usize {
        self.heads.len()
    }

    fn check_head(&self, j: usize) -> Result<()> {
        if j >= self.heads.len() {
            return Err(Error::invalid("head", format!("index {j} out of range for {} heads", self.heads.len())));
        }
        Ok(())
    }

    fn check_input(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.arch.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "network expects {} inputs, got {}",
                self.arch.input_dim,
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Layers applied for head `j`, in order.
    fn path(&self, j: usize) -> impl Iterator<Item = &Dense> {
        self.trunk.iter().chain(self.heads[j].iter())
    }

    /// Activations entering every layer plus the output logits.
    fn forward_trace(&self, j: usize, x: ArrayView2<'_, f64>) -> (Vec<Matrix>, Matrix) {
        let layers: Vec<&Dense> = self.path(j).collect();
        let mut inputs = Vec::with_capacity(layers.len());
        let mut a = x.to_owned();
        for (l, layer) in layers.iter().enumerate() {
            let mut z = layer.forward(a.view());
            if l + 1 < layers.len() {
                relu_inplace(&mut z);
            }
            inputs.push(a);
            a = z;
        }
        (inputs, a)
    }

    /// Softmax output `[p(negative), p(positive)]` of head `j`.
    pub fn head_probabilities(&self, j: usize, x: ArrayView2<'_, f64>) -> Result<Matrix> {
        self.check_head(j)?;
        self.check_input(x)?;
        let (_, logits) = self.forward_trace(j, x);
        Ok(log_softmax(&logits).mapv(f64::exp))
    }

    /// Positive-class probability of head `j` for every row.
    pub fn head_output(&self, j: usize, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        Ok(self.head_probabilities(j, x)?.column(1).to_vec())
    }

    /// Mean soft-label cross-entropy of head `j`.
    pub fn loss(&self, j: usize, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<f64> {
        self.check_head(j)?;
        self.check_input(x)?;
        let (_, logits) = self.forward_trace(j, x);
        Ok(cross_entropy(&log_softmax(&logits), targets))
    }

    /// Loss and gradients for every layer on head `j`'s path (trunk first).
    pub fn loss_and_gradients(
        &self,
        j: usize,
        x: ArrayView2<'_, f64>,
        targets: ArrayView2<'_, f64>,
    ) -> Result<(f64, Vec<Dense>)> {
        self.check_head(j)?;
        self.check_input(x)?;
        let (inputs, logits) = self.forward_trace(j, x);
        let logp = log_softmax(&logits);
        let loss = cross_entropy(&logp, targets);
        let batch = x.nrows() as f64;
        // d(loss)/d(logits) for softmax + cross-entropy with targets summing to 1.
        let mut delta = (logp.mapv(f64::exp) - targets) / batch;
        let layers: Vec<&Dense> = self.path(j).collect();
        let mut grads = Vec::with_capacity(layers.len());
        for l in (0..layers.len()).rev() {
            let a = &inputs[l];
            grads.push(Dense { w: a.t().dot(&delta), b: delta.sum_axis(Axis(0)) });
            if l > 0 {
                let mut back = delta.dot(&layers[l].w.t());
                // `a` is the rectified output of layer l - 1.
                ndarray::Zip::from(&mut back).and(a).for_each(|g, &act| {
                    if act <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
        }
        grads.reverse();
        Ok((loss, grads))
    }

    fn apply_gradients(&mut self, j: usize, grads: &[Dense], lr: f64) {
        let n_trunk = self.trunk.len();
        for (l, g) in grads.iter().enumerate() {
            let layer = if l < n_trunk { &mut self.trunk[l] } else { &mut self.heads[j][l - n_trunk] };
            layer.w.scaled_add(-lr, &g.w);
            layer.b.scaled_add(-lr, &g.b);
        }
    }

    /// Trunk and head-`j` parameters flattened in layer order (W row-major, then b).
    pub fn path_parameters(&self, j: usize) -> Vec<f64> {
        self.path(j).flat_map(|l| l.w.iter().chain(l.b.iter()).copied()).collect()
    }

    pub fn set_path_parameters(&mut self, j: usize, values: &[f64]) -> Result<()> {
        let n_trunk = self.trunk.len();
        let total: usize = self.path(j).map(Dense::n_params).sum();
        if values.len() != total {
            return Err(Error::DimensionMismatch(format!("{} values for {total} parameters", values.len())));
        }
        let mut it = values.iter().copied();
        for l in 0..n_trunk + self.heads[j].len() {
            let layer = if l < n_trunk { &mut self.trunk[l] } else { &mut self.heads[j][l - n_trunk] };
            for v in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *v = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.trunk.iter().chain(self.heads.iter().flatten()).all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
            && self.head_weights.iter().all(|v| v.is_finite())
    }
}

fn cross_entropy(logp: &Matrix, targets: ArrayView2<'_, f64>) -> f64 {
    -(logp * &targets).sum() / logp.nrows() as f64
}

/// Per-epoch training record of one head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Full-data loss before the first update.
    pub initial_loss: f64,
    /// Mean minibatch loss seen during each epoch.
    pub epoch_losses: Vec<f64>,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Minibatch gradient descent on head `j` and the shared trunk.
///
/// Other heads are never touched. Rows are reshuffled every epoch from a
/// stream derived from `cfg.seed` and `j`.
pub fn train_head(
    model: &mut EnsembleModel,
    j: usize,
    data: &SoftLabeledDataset,
    cfg: &TrainConfig,
) -> Result<TrainTrace> {
    cfg.validate()?;
    model.check_head(j)?;
    model.check_input(data.features().view())?;
    if data.is_empty() {
        return Err(Error::Empty("training data for head".into()));
    }
    let x = data.features();
    let y = data.soft_labels();
    let initial_loss = model.loss(j, x.view(), y.view())?;
    let mut stream = RandomStream::new(cfg.seed).derive(j as u64);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        stream.shuffle(&mut order);
        let mut total = 0.0;
        for (b, rows) in order.chunks(cfg.batch_size).enumerate() {
            let xb = x.select(Axis(0), rows);
            let yb = y.select(Axis(0), rows);
            let (loss, grads) = model.loss_and_gradients(j, xb.view(), yb.view())?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("loss of head {j} at epoch {epoch}, batch {b}")));
            }
            model.apply_gradients(j, &grads, cfg.learning_rate);
            total += loss * rows.len() as f64;
        }
        epoch_losses.push(total / data.n_rows() as f64);
    }
    if !model.is_finite() {
        return Err(Error::NonFinite(format!("parameters of head {j} after training")));
    }
    Ok(TrainTrace { initial_loss, epoch_losses })
}

/// `w_i = s_i / sum_j s_j`; uniform when every score is zero.
pub fn head_weights_from_scores(scores: &[f64]) -> Vec<f64> {
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.iter().map(|s| s / total).collect()
    } else {
        vec![1.0 / scores.len() as f64; scores.len()]
    }
}

/// Scores every head by F+G at threshold 0.5 on `train` (already projected)
/// and stores the normalized scores as head weights. Returns the raw scores.
pub fn score_heads(model: &mut EnsembleModel, train: &Dataset) -> Result<Vec<f64>> {
    let x = train.features().view();
    let mut scores = Vec::with_capacity(model.n_heads());
    for j in 0..model.n_heads() {
        let pred: Vec<u8> = model.head_output(j, x)?.iter().map(|&p| u8::from(p >= 0.5)).collect();
        let m = compute_metrics(&confusion(train.labels(), &pred)?)?;
        scores.push(m.f_plus_g);
    }
    model.head_weights = head_weights_from_scores(&scores);
    ensure_finite(model.head_weights.iter(), "head weights")?;
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `R_i = sum_j w_j o_j(x_i)`.
    pub positive_probability: Vec<f64>,
    pub labels: Vec<u8>,
}

/// Weighted average of the heads' positive-class outputs; label 1 iff `R >= threshold`.
pub fn ensemble_predict(model: &EnsembleModel, x: ArrayView2<'_, f64>, threshold: f64) -> Result<Prediction> {
    model.check_input(x)?;
    let outputs = (0..model.n_heads()).map(|j| model.head_output(j, x)).collect::<Result<Vec<_>>>()?;
    let r: Vec<f64> = (0..x.nrows())
        .map(|i| {
            let (lo, hi) = outputs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o[i]), hi.max(o[i])));
            let v: f64 = outputs.iter().zip(&model.head_weights).map(|(o, w)| w * o[i]).sum();
            // rounding can push a convex combination a few ulps outside its hull
            v.clamp(lo, hi)
        })
        .collect();
    let labels = r.iter().map(|&v| u8::from(v >= threshold)).collect();
    Ok(Prediction { positive_probability: r, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_grad;
    use ndarray::array;

    fn small_model(input: usize, heads: usize, seed: u64) -> EnsembleModel {
        let arch = NetworkArch { input_dim: input, trunk: vec![6], heads, head_hidden: 4 };
        build_network(&arch, &mut RandomStream::new(seed)).unwrap()
    }

    #[test]
    fn same_seed_same_parameters() {
        let arch = NetworkArch::default_for(3, 2);
        let a = build_network(&arch, &mut RandomStream::new(5)).unwrap();
        let b = build_network(&arch, &mut RandomStream::new(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(arch.trunk, vec![16]);
    }

    #[test]
    fn single_head() {
        let m = small_model(2, 1, 0);
        assert_eq!(m.n_heads(), 1);
        assert_eq!(m.head_weights, vec![1.0]);
    }

    #[test]
    fn softmax_outputs_sum_to_one() {
        let m = small_model(3, 3, 1);
        let x = array![[0.3, -2.0, 5.0], [100.0, 0.0, -50.0]];
        for j in 0..3 {
            for row in m.head_probabilities(j, x.view()).unwrap().rows() {
                assert!((row.sum() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = small_model(3, 2, 2);
        let mut s = RandomStream::new(3);
        let x = Array2::from_shape_fn((5, 3), |_| s.normal(0.0, 1.0).unwrap());
        let f: Vec<f64> = (0..5).map(|_| s.next_f64()).collect();
        let y = Array2::from_shape_fn((5, 2), |(i, c)| if c == 1 { f[i] } else { 1.0 - f[i] });
        for j in 0..2 {
            let (_, grads) = m.loss_and_gradients(j, x.view(), y.view()).unwrap();
            let analytic: Vec<f64> = grads.iter().flat_map(|g| g.w.iter().chain(g.b.iter()).copied()).collect();
            let theta = m.path_parameters(j);
            let p0 = Array2::from_shape_vec((1, theta.len()), theta.clone()).unwrap();
            let numeric = finite_diff_grad(
                |p| {
                    let mut probe = m.clone();
                    probe.set_path_parameters(j, p.as_slice().unwrap()).unwrap();
                    probe.loss(j, x.view(), y.view()).unwrap()
                },
                &p0,
                1e-6,
            )
            .unwrap();
            let num: f64 = analytic.iter().zip(numeric.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(num / den <= 1e-4, "head {j}: rel err {}", num / den);
            m.set_path_parameters(j, &theta).unwrap();
        }
    }

    #[test]
    fn one_hot_loss_is_standard_cross_entropy() {
        let m = small_model(2, 1, 4);
        let x = array![[0.5, 1.0], [-1.0, 0.2]];
        let y = array![[1.0, 0.0], [0.0, 1.0]];
        let p = m.head_probabilities(0, x.view()).unwrap();
        let expected = -(p[[0, 0]].ln() + p[[1, 1]].ln()) / 2.0;
        assert!((m.loss(0, x.view(), y.view()).unwrap() - expected).abs() <= 1e-12);
    }

    fn soft_fixture() -> SoftLabeledDataset {
        let ds = Dataset::new("s", array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [-1.0, -1.0]], vec![0, 1, 1, 0]).unwrap();
        SoftLabeledDataset::from_hard(&ds)
    }

    #[test]
    fn zero_epochs_changes_nothing() {
        let mut m = small_model(2, 2, 6);
        let before = m.clone();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        train_head(&mut m, 1, &soft_fixture(), &cfg).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn other_heads_untouched() {
        let mut m = small_model(2, 3, 7);
        let before = m.clone();
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        train_head(&mut m, 1, &soft_fixture(), &cfg).unwrap();
        assert_eq!(m.heads[0], before.heads[0]);
        assert_eq!(m.heads[2], before.heads[2]);
        assert_ne!(m.heads[1], before.heads[1]);
        assert_ne!(m.trunk, before.trunk);
    }

    #[test]
    fn head_weight_rule() {
        let w = head_weights_from_scores(&[0.6, 1.4]);
        assert!((w[0] - 0.3).abs() < 1e-15 && (w[1] - 0.7).abs() < 1e-15);
        assert_eq!(head_weights_from_scores(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(head_weights_from_scores(&[0.0, 0.0, 0.0]), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn ensemble_rule_hand_case() {
        let mut m = small_model(1, 2, 8);
        // Force constant head outputs via the output bias.
        for (j, target) in [0.5_f64, 1.0 - 1e-12].iter().enumerate() {
            let out = m.heads[j].last_mut().unwrap();
            out.w.fill(0.0);
            out.b = array![0.0, (target / (1.0 - target)).ln()];
        }
        m.head_weights = vec![0.3, 0.7];
        let pred = ensemble_predict(&m, array![[0.4]].view(), 0.5).unwrap();
        assert!((pred.positive_probability[0] - 0.85).abs() < 1e-9);
        assert_eq!(pred.labels, vec![1]);
    }

    #[test]
    fn single_head_prediction_is_head_output() {
        let m = small_model(2, 1, 9);
        let x = array![[0.1, 0.2], [3.0, -1.0]];
        let pred = ensemble_predict(&m, x.view(), 0.5).unwrap();
        assert_eq!(pred.positive_probability, m.head_output(0, x.view()).unwrap());
        assert!(ensemble_predict(&m, array![[1.0]].view(), 0.5).is_err());
    }

    #[test]
    fn separable_loss_halves_at_default_config() {
        let mut s = RandomStream::new(21);
        let n = 100;
        let x = Array2::from_shape_fn((n, 2), |(i, c)| {
            let centre = if i < n / 2 { -1.5 } else { 1.5 };
            centre * if c == 0 { 1.0 } else { 0.5 } + s.normal(0.0, 0.4).unwrap()
        });
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
        let ds = Dataset::new("sep", x, labels).unwrap();
        let mut m = build_network(&NetworkArch::default_for(2, 1), &mut RandomStream::new(3)).unwrap();
        let trace = train_head(&mut m, 0, &SoftLabeledDataset::from_hard(&ds), &TrainConfig::default()).unwrap();
        assert_eq!(trace.epoch_losses.len(), 200);
        let after = m.loss(0, ds.features().view(), SoftLabeledDataset::from_hard(&ds).soft_labels().view()).unwrap();
        assert!(after <= 0.5 * trace.initial_loss, "{} -> {after}", trace.initial_loss);
    }

    proptest::proptest! {
        #[test]
        fn ensemble_output_is_convex(seed in 0u64..500, w0 in 0.0f64..1.0, w1 in 0.0f64..1.0, w2 in 0.0f64..1.0) {
            let mut m = small_model(2, 3, seed);
            m.head_weights = head_weights_from_scores(&[w0, w1, w2]);
            proptest::prop_assert!((m.head_weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let mut s = RandomStream::new(seed + 1);
            let x = Array2::from_shape_fn((8, 2), |_| s.normal(0.0, 3.0).unwrap());
            let pred = ensemble_predict(&m, x.view(), 0.5).unwrap();
            let outs: Vec<Vec<f64>> = (0..3).map(|j| m.head_output(j, x.view()).unwrap()).collect();
            for (i, r) in pred.positive_probability.iter().enumerate() {
                let lo = outs.iter().map(|o| o[i]).fold(f64::INFINITY, f64::min);
                let hi = outs.iter().map(|o| o[i]).fold(f64::NEG_INFINITY, f64::max);
                proptest::prop_assert!(lo <= *r && *r <= hi);
            }
        }
    }

    #[test]
    fn invalid_arch() {
        let arch = NetworkArch { input_dim: 2, trunk: vec![4], heads: 0, head_hidden: 3 };
        assert!(build_network(&arch, &mut RandomStream::new(0)).is_err());
    }
}
