use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsos_core::dataset::recipes::Recipe;
use wsos_core::metrics::Metric;
use wsos_core::pipeline::Method;

#[derive(Debug, Parser)]
#[command(name = "wsos", version, about = "Weakly supervised oversampling for imbalanced classification")]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic two-Gaussian dataset as CSV.
    GenData(GenDataArgs),
    /// Download raw dataset files into the checksum-verified cache.
    Fetch(FetchArgs),
    /// Turn cached raw files into a binary dataset CSV at a target imbalance ratio.
    Prep(PrepArgs),
    /// Oversample the positive class and write the soft-labelled result.
    Resample(ResampleArgs),
    /// Fit a pipeline on a dataset CSV and save it.
    Train(TrainArgs),
    /// Score a saved pipeline on a labelled CSV.
    Eval(EvalArgs),
    /// Run a cross-validated benchmark described by a config file.
    Bench(BenchArgs),
    /// Render SVG charts.
    #[command(subcommand)]
    Plot(PlotCommand),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub dims: usize,
    #[arg(long)]
    pub n_negative: usize,
    #[arg(long)]
    pub ir: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataDirArgs {
    /// Raw-file cache root [default: $IMB_DATA_DIR or ./data]
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Manifest with download URLs and checksums [default: bundled]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(value_parser = parse_recipe, required_unless_present = "all")]
    pub names: Vec<Recipe>,
    /// Fetch every dataset in the manifest.
    #[arg(long, conflicts_with = "names")]
    pub all: bool,
    /// Re-download even when a cached copy exists.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub data: DataDirArgs,
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(value_parser = parse_recipe)]
    pub name: Recipe,
    /// Target negative/positive ratio.
    #[arg(long)]
    pub ir: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub data: DataDirArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResampleMethod {
    /// SMOTE with graph-propagated soft labels.
    Gss,
    /// Plain SMOTE with hard positive labels.
    Smote,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Label column name or 0-based index.
    #[arg(long, default_value = "label")]
    pub label: String,
    #[arg(long, value_enum, default_value_t = ResampleMethod::Gss)]
    pub method: ResampleMethod,
    /// Projection CSV (d rows, D columns) applied before oversampling.
    #[arg(long)]
    pub projection: Option<PathBuf>,
    /// SMOTE neighbour count.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Retention threshold on the propagated positive probability.
    #[arg(long, default_value_t = 0.5)]
    pub p_delta: f64,
    #[arg(long, default_value_t = 5)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the fitted pipeline.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Pipeline settings: a run config (its `pipeline` section is used) or a bare pipeline object.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_method, default_value = "wsos")]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the learned projection as CSV.
    #[arg(long)]
    pub projection_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Write the metrics JSON here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides `pipeline.seeds` (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Overrides `pipeline.folds`.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Overrides `methods` (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Option<Vec<Method>>,
    /// Overrides `data_dir`.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PlotCommand {
    /// 2-D scatter of a dataset or resampled CSV.
    Scatter(ScatterArgs),
    /// Mean metric per method against the datasets' imbalance ratios.
    Metric(MetricArgs),
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Projection CSV mapping the features to 2 dimensions.
    #[arg(long)]
    pub projection: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// results.json from `bench`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_metric, default_value = "g_mean")]
    pub metric: Metric,
    #[arg(long)]
    pub title: Option<String>,
}

fn parse_recipe(s: &str) -> Result<Recipe, String> {
    s.parse().map_err(|e: wsos_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: wsos_core::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: wsos_core::Error| e.to_string())
}
