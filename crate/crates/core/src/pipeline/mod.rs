//! End-to-end training and evaluation: bootstrap, projection learning,
//! graph-labelled oversampling, multi-head training and head weighting.

mod experiment;
mod io;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::csnca::{self, CsNcaConfig, ProjectionMatrix};
use crate::dataset::{apply_scaler, fit_scaler, subsample_class, Dataset, ScalerParams, NEGATIVE, POSITIVE};
use crate::ensemble::{
    bootstrap_subsets, build_network, ensemble_predict, score_heads, train_head, EnsembleModel, NetworkArch,
    Prediction, TrainConfig, TrainTrace,
};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, confusion, ConfusionMatrix, MetricSet};
use crate::numerics::RandomStream;
use crate::oversample::{gss_oversample, smote_oversample, GssConfig, GssStatus, SoftLabeledDataset};

pub use experiment::{
    run_experiment, Aggregate, CellResult, ExperimentReport, RankEntry, REPORT_SCHEMA_VERSION,
};
pub use io::{read_pipeline, write_pipeline, PIPELINE_FORMAT_VERSION};

/// Bootstrap ensemble settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BefConfig {
    /// Number of bootstrapped subsets, one head each.
    pub k: usize,
    /// Negative-to-positive ratio inside every subset.
    pub ir_prime: f64,
}

impl Default for BefConfig {
    fn default() -> Self {
        Self { k: 5, ir_prime: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub bef: BefConfig,
    pub csnca: CsNcaConfig,
    pub gss: GssConfig,
    pub train: TrainConfig,
    /// Positive label iff the ensemble output reaches this value.
    pub threshold: f64,
    pub folds: usize,
    pub seeds: Vec<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bef: BefConfig::default(),
            csnca: CsNcaConfig::default(),
            gss: GssConfig::default(),
            train: TrainConfig::default(),
            threshold: 0.5,
            folds: 5,
            seeds: vec![0],
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bef.k == 0 {
            return Err(Error::invalid("bef.k", "must be at least 1"));
        }
        if !(self.bef.ir_prime.is_finite() && self.bef.ir_prime >= 1.0) {
            return Err(Error::invalid("bef.ir_prime", format!("must be >= 1, got {}", self.bef.ir_prime)));
        }
        self.csnca.validate()?;
        self.gss.validate()?;
        self.train.validate()?;
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("threshold", format!("must lie in (0, 1), got {}", self.threshold)));
        }
        if self.folds < 2 {
            return Err(Error::invalid("folds", format!("must be at least 2, got {}", self.folds)));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "need at least one seed"));
        }
        Ok(())
    }
}

/// Everything needed to classify new rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPipeline {
    pub scaler: ScalerParams,
    /// `None` for baselines that classify in the scaled input space.
    pub projection: Option<ProjectionMatrix>,
    pub model: EnsembleModel,
    pub threshold: f64,
}

impl TrainedPipeline {
    pub fn input_dims(&self) -> usize {
        self.scaler.n_features()
    }

    /// Scaled and (when present) projected features.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<ndarray::Array2<f64>> {
        let scaled = self.scaler.transform(x)?;
        match &self.projection {
            Some(p) => p.project(scaled.view()),
            None => Ok(scaled),
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Prediction> {
        let z = self.transform(x)?;
        ensemble_predict(&self.model, z.view(), self.threshold)
    }
}

/// Side information gathered while fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Subset whose rows trained the projection.
    pub projection_subset: Option<usize>,
    pub csnca_q: Option<(f64, f64)>,
    pub gss_status: Vec<GssStatus>,
    pub head_scores: Vec<f64>,
    pub traces: Vec<TrainTrace>,
}

pub fn fit(train: &Dataset, cfg: &PipelineConfig, stream: &RandomStream) -> Result<TrainedPipeline> {
    fit_with_diagnostics(train, cfg, stream).map(|(p, _)| p)
}

/// Runs the full training procedure. Errors carry the step that failed.
pub fn fit_with_diagnostics(
    train: &Dataset,
    cfg: &PipelineConfig,
    stream: &RandomStream,
) -> Result<(TrainedPipeline, FitDiagnostics)> {
    cfg.validate()?;
    check_trainable(train)?;
    let scaler = fit_scaler(train).map_err(|e| e.at_step(0, "standardize"))?;
    let scaled = apply_scaler(&scaler, train).map_err(|e| e.at_step(0, "standardize"))?;

    let subsets = bootstrap_subsets(&scaled, cfg.bef.k, cfg.bef.ir_prime, &stream.derive_named("bootstrap"))
        .map_err(|e| e.at_step(1, "bootstrap"))?;
    let chosen = stream.derive_named("select").index(subsets.len());

    // A target dimension above the input dimension is capped rather than rejected.
    let d = cfg.csnca.d.min(train.n_features());
    let csnca_cfg = CsNcaConfig { d, seed: stream.derive_named("csnca").seed(), ..cfg.csnca.clone() };
    let projection_fit = csnca::fit(&subsets[chosen].dataset, &csnca_cfg).map_err(|e| e.at_step(3, "cs-nca"))?;
    let projection = projection_fit.projection;

    let arch = NetworkArch::default_for(projection.target_dims(), cfg.bef.k);
    let mut model = build_network(&arch, &mut stream.derive_named("network")).map_err(|e| e.at_step(6, "network"))?;
    let train_cfg = TrainConfig { seed: stream.derive_named("train").seed(), ..cfg.train.clone() };
    let gss_root = stream.derive_named("gss");
    let mut gss_status = Vec::with_capacity(subsets.len());
    let mut traces = Vec::with_capacity(subsets.len());
    for (j, subset) in subsets.iter().enumerate() {
        let projected = projection.project_dataset(&subset.dataset).map_err(|e| e.at_step(5, "gss"))?;
        let mut gss_stream = gss_root.derive(j as u64);
        let outcome = gss_oversample(&projected, &cfg.gss, &mut gss_stream).map_err(|e| e.at_step(5, "gss"))?;
        gss_status.push(outcome.status);
        let data = if outcome.status == GssStatus::NoneRetained {
            log::warn!("subset {j}: no synthetic sample passed the label filter, using plain SMOTE labels");
            smote_oversample(&projected, cfg.gss.k, &mut gss_stream).map_err(|e| e.at_step(5, "gss"))?
        } else {
            outcome.data
        };
        traces.push(train_head(&mut model, j, &data, &train_cfg).map_err(|e| e.at_step(6, "train head"))?);
    }

    let projected_train = projection.project_dataset(&scaled).map_err(|e| e.at_step(7, "score heads"))?;
    let head_scores = score_heads(&mut model, &projected_train).map_err(|e| e.at_step(7, "score heads"))?;
    let pipeline = TrainedPipeline { scaler, projection: Some(projection), model, threshold: cfg.threshold };
    let diagnostics = FitDiagnostics {
        projection_subset: Some(chosen),
        csnca_q: Some((projection_fit.q_initial, projection_fit.q_final)),
        gss_status,
        head_scores,
        traces,
    };
    Ok((pipeline, diagnostics))
}

fn check_trainable(train: &Dataset) -> Result<()> {
    train.require_both_classes(1)?;
    let (_, n_pos) = train.class_counts();
    if n_pos < 2 {
        return Err(Error::InsufficientClass { class: POSITIVE, count: n_pos, required: 2 });
    }
    Ok(())
}

/// Confusion matrix, metrics and raw ensemble output on a labelled set.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
    pub prediction: Prediction,
}

pub fn evaluate(pipeline: &TrainedPipeline, test: &Dataset) -> Result<Evaluation> {
    if test.n_features() != pipeline.input_dims() {
        return Err(Error::DimensionMismatch(format!(
            "pipeline expects {} features, test set has {}",
            pipeline.input_dims(),
            test.n_features()
        )));
    }
    let prediction = pipeline.predict(test.features().view())?;
    let cm = confusion(test.labels(), &prediction.labels)?;
    Ok(Evaluation { confusion: cm, metrics: compute_metrics(&cm)?, prediction })
}

/// Methods the experiment driver knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Bootstrap ensemble over projected, graph-labelled oversampled subsets.
    Wsos,
    /// SMOTE to balance, then a single-head network.
    SmoteNn,
    /// Random undersampling of negatives to balance, then a single-head network.
    RusNn,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Wsos, Method::SmoteNn, Method::RusNn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wsos => "wsos",
            Method::SmoteNn => "smote_nn",
            Method::RusNn => "rus_nn",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown { kind: "method", name: s.to_string() })
    }
}

/// Balanced training data for a baseline, in the scaled input space.
pub fn baseline_training_set(
    method: Method,
    scaled: &Dataset,
    cfg: &PipelineConfig,
    stream: &mut RandomStream,
) -> Result<SoftLabeledDataset> {
    let (_, n_pos) = scaled.class_counts();
    match method {
        Method::SmoteNn => smote_oversample(scaled, cfg.gss.k, stream),
        Method::RusNn => {
            let balanced = subsample_class(scaled, NEGATIVE, n_pos.min(scaled.class_counts().0), stream)?;
            Ok(SoftLabeledDataset::from_hard(&balanced))
        }
        Method::Wsos => Err(Error::invalid("method", "wsos is not a baseline")),
    }
}

/// Fits a baseline: same network rules and training settings, one head, no projection.
pub fn fit_baseline(
    method: Method,
    train: &Dataset,
    cfg: &PipelineConfig,
    stream: &RandomStream,
) -> Result<TrainedPipeline> {
    cfg.validate()?;
    check_trainable(train)?;
    let scaler = fit_scaler(train)?;
    let scaled = apply_scaler(&scaler, train)?;
    let data = baseline_training_set(method, &scaled, cfg, &mut stream.derive_named("resample"))?;
    let arch = NetworkArch::default_for(scaled.n_features(), 1);
    let mut model = build_network(&arch, &mut stream.derive_named("network"))?;
    let train_cfg = TrainConfig { seed: stream.derive_named("train").seed(), ..cfg.train.clone() };
    train_head(&mut model, 0, &data, &train_cfg)?;
    Ok(TrainedPipeline { scaler, projection: None, model, threshold: cfg.threshold })
}

/// Fits `method` on `train` and scores it on `test`.
pub fn run_method(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    cfg: &PipelineConfig,
    stream: &RandomStream,
) -> Result<Evaluation> {
    let pipeline = match method {
        Method::Wsos => fit(train, cfg, stream)?,
        _ => fit_baseline(method, train, cfg, stream)?,
    };
    evaluate(&pipeline, test)
}

/// Named-baseline entry point.
pub fn run_baseline(
    name: &str,
    train: &Dataset,
    test: &Dataset,
    cfg: &PipelineConfig,
    stream: &RandomStream,
) -> Result<Evaluation> {
    let method: Method = name.parse()?;
    if method == Method::Wsos {
        return Err(Error::Unknown { kind: "baseline", name: name.to_string() });
    }
    run_method(method, train, test, cfg, stream)
}

#[cfg(test)]
mod tests;
