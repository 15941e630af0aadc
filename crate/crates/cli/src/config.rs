use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wsos_core::dataset::recipes::{self, Recipe};
use wsos_core::dataset::{generate_synthetic, load_csv, Dataset, GenSpec, LabelColumn};
use wsos_core::numerics::RandomStream;
use wsos_core::pipeline::{Method, PipelineConfig};

use crate::fetch::{verify_cache, Manifest};

#[cfg(test)]
pub const RUN_CONFIG_SCHEMA: &str = include_str!("../schema/run-config.schema.json");

/// A `bench` run: pipeline settings, datasets, methods and output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub pipeline: PipelineConfig,
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Raw-file cache for recipe datasets; `null` uses IMB_DATA_DIR or `./data`.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        dims: usize,
        n_negative: usize,
        imbalance_ratio: f64,
        #[serde(default)]
        seed: u64,
    },
    Recipe {
        name: Recipe,
        imbalance_ratio: f64,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_label")]
        label: String,
    },
}

fn default_label() -> String {
    "label".into()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("config {} is invalid", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate().context("invalid `pipeline` section")?;
        if self.datasets.is_empty() {
            bail!("invalid argument `datasets`: list at least one dataset");
        }
        if self.methods.is_empty() {
            bail!("invalid argument `methods`: list at least one method");
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(*m) {
                bail!("invalid argument `methods`: `{m}` listed twice");
            }
        }
        for (i, ds) in self.datasets.iter().enumerate() {
            match ds {
                DatasetSpec::Synthetic { dims, n_negative, imbalance_ratio, .. } => {
                    GenSpec::new(*dims, *n_negative, *imbalance_ratio)
                        .validate()
                        .with_context(|| format!("invalid `datasets[{i}]`"))?;
                }
                DatasetSpec::Recipe { imbalance_ratio, .. } => {
                    if !(imbalance_ratio.is_finite() && *imbalance_ratio >= 1.0) {
                        bail!("invalid argument `datasets[{i}].imbalance_ratio`: must be >= 1, got {imbalance_ratio}");
                    }
                }
                DatasetSpec::Csv { label, .. } => {
                    label.parse::<LabelColumn>().with_context(|| format!("invalid `datasets[{i}].label`"))?;
                }
            }
        }
        Ok(())
    }
}

impl DatasetSpec {
    pub fn load(&self, data_dir: &Path, manifest: &Manifest) -> Result<Dataset> {
        match self {
            DatasetSpec::Synthetic { dims, n_negative, imbalance_ratio, seed } => {
                let spec = GenSpec::new(*dims, *n_negative, *imbalance_ratio);
                Ok(generate_synthetic(&spec, &mut RandomStream::new(*seed))?)
            }
            DatasetSpec::Recipe { name, imbalance_ratio, seed } => {
                verify_cache(name.name(), manifest.entry(name.name())?, data_dir)?;
                let dir = recipes::cache_dir(data_dir, *name);
                Ok(recipes::prepare(*name, &dir, *imbalance_ratio, &mut RandomStream::new(*seed))?)
            }
            DatasetSpec::Csv { path, label } => {
                let ds = load_csv(path, &label.parse()?)?;
                let name = path.file_stem().map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
                Ok(ds.renamed(name))
            }
        }
    }
}
