use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_method, Method, PipelineConfig};
use crate::dataset::{stratified_kfold, Dataset, DatasetInfo};
use crate::error::{Error, Result};
use crate::metrics::{mean_rank, ConfusionMatrix, Metric, MetricSet, RankTable};
use crate::numerics::RandomStream;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Held-out result of one (dataset, method, fold, seed) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub method: Method,
    pub fold: usize,
    pub seed: u64,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
}

/// Mean and population standard deviation of a (dataset, method) pair over all its cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dataset: String,
    pub method: Method,
    pub cells: usize,
    pub mean: MetricSet,
    pub sd: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub metric: Metric,
    pub table: RankTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub datasets: Vec<DatasetInfo>,
    pub methods: Vec<Method>,
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<Aggregate>,
    /// Ranks computed on per-dataset mean metrics.
    pub ranks: Vec<RankEntry>,
}

impl ExperimentReport {
    pub fn aggregate(&self, dataset: &str, method: Method) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.dataset == dataset && a.method == method)
    }

    /// Mean of `metric` over folds, per seed, in seed order.
    pub fn per_seed_mean(&self, dataset: &str, method: Method, metric: Metric) -> Vec<(u64, f64)> {
        let mut by_seed: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for c in self.cells.iter().filter(|c| c.dataset == dataset && c.method == method) {
            by_seed.entry(c.seed).or_default().push(metric.of(&c.metrics));
        }
        let order: Vec<u64> = self.config.seeds.clone();
        order
            .into_iter()
            .filter_map(|s| by_seed.get(&s).map(|v| (s, v.iter().sum::<f64>() / v.len() as f64)))
            .collect()
    }

    /// Flat per-cell table.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["dataset", "method", "fold", "seed", "tp", "fn", "fp", "tn", "f_measure", "g_mean", "f_plus_g"])?;
        for c in &self.cells {
            let cm = &c.confusion;
            w.write_record([
                c.dataset.clone(),
                c.method.to_string(),
                c.fold.to_string(),
                c.seed.to_string(),
                cm.tp.to_string(),
                cm.fn_.to_string(),
                cm.fp.to_string(),
                cm.tn.to_string(),
                c.metrics.f_measure.to_string(),
                c.metrics.g_mean.to_string(),
                c.metrics.f_plus_g.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report csv>", e))?;
        Ok(())
    }
}

/// Stream for one cell; independent of how cells are scheduled.
fn cell_stream(seed: u64, dataset: &str, method: Method, fold: usize) -> RandomStream {
    RandomStream::new(seed).derive_named(dataset).derive_named(method.name()).derive(fold as u64)
}

/// Cross-validates every method on every dataset for every seed.
///
/// Fold assignment depends only on the seed and dataset name, so all methods
/// see the same splits. Cells run in parallel; results keep a fixed order.
pub fn run_experiment(datasets: &[Dataset], methods: &[Method], cfg: &PipelineConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if datasets.is_empty() || methods.is_empty() {
        return Err(Error::Empty("experiment needs at least one dataset and one method".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for ds in datasets {
        if !names.insert(ds.name()) {
            return Err(Error::invalid("datasets", format!("duplicate dataset name `{}`", ds.name())));
        }
    }

    let mut jobs = Vec::new();
    for ds in datasets {
        for &seed in &cfg.seeds {
            let mut fold_stream = RandomStream::new(seed).derive_named("folds").derive_named(ds.name());
            let split = stratified_kfold(ds, cfg.folds, &mut fold_stream)?;
            for fold in 0..cfg.folds {
                let (train, test) = split.split(ds, fold)?;
                for &method in methods {
                    jobs.push((ds.name().to_string(), method, fold, seed, train.clone(), test.clone()));
                }
            }
        }
    }

    let cells = jobs
        .into_par_iter()
        .map(|(dataset, method, fold, seed, train, test)| {
            log::info!("cell dataset={dataset} method={method} fold={fold} seed={seed}");
            let stream = cell_stream(seed, &dataset, method, fold);
            match run_method(method, &train, &test, cfg, &stream) {
                Ok(eval) => Ok(CellResult { dataset, method, fold, seed, confusion: eval.confusion, metrics: eval.metrics }),
                Err(e) => Err(Error::Cell { dataset, method: method.to_string(), fold, seed, source: Box::new(e) }),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut aggregates = Vec::new();
    for ds in datasets {
        for &method in methods {
            let sel: Vec<&MetricSet> =
                cells.iter().filter(|c| c.dataset == ds.name() && c.method == method).map(|c| &c.metrics).collect();
            aggregates.push(aggregate(ds.name(), method, &sel));
        }
    }

    let method_names: Vec<String> = methods.iter().map(|m| m.to_string()).collect();
    let ranks = [Metric::FMeasure, Metric::GMean, Metric::FPlusG]
        .into_iter()
        .map(|metric| {
            let scores: Vec<Vec<f64>> = methods
                .iter()
                .map(|&m| {
                    datasets
                        .iter()
                        .map(|ds| {
                            aggregates
                                .iter()
                                .find(|a| a.dataset == ds.name() && a.method == m)
                                .map_or(f64::NAN, |a| metric.of(&a.mean))
                        })
                        .collect()
                })
                .collect();
            Ok(RankEntry { metric, table: mean_rank(&method_names, &scores)? })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        datasets: datasets.iter().map(DatasetInfo::from).collect(),
        methods: methods.to_vec(),
        cells,
        aggregates,
        ranks,
    })
}

fn aggregate(dataset: &str, method: Method, sets: &[&MetricSet]) -> Aggregate {
    let n = sets.len() as f64;
    let stat = |get: fn(&MetricSet) -> f64| {
        let mean = sets.iter().map(|m| get(m)).sum::<f64>() / n;
        let var = sets.iter().map(|m| (get(m) - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (f_m, f_s) = stat(|m| m.f_measure);
    let (g_m, g_s) = stat(|m| m.g_mean);
    let (s_m, s_s) = stat(|m| m.f_plus_g);
    Aggregate {
        dataset: dataset.to_string(),
        method,
        cells: sets.len(),
        mean: MetricSet { f_measure: f_m, g_mean: g_m, f_plus_g: s_m },
        sd: MetricSet { f_measure: f_s, g_mean: g_s, f_plus_g: s_s },
    }
}
