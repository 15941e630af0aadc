use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use wsos_core::csnca::ProjectionMatrix;
use wsos_core::dataset::recipes::{self, Recipe};
use wsos_core::dataset::{generate_synthetic, load_csv, write_csv, Dataset, GenSpec, LabelColumn};
use wsos_core::metrics::{ConfusionMatrix, MetricSet};
use wsos_core::numerics::RandomStream;
use wsos_core::oversample::{gss_oversample, smote_oversample, GssConfig, Origin, SoftLabeledDataset};
use wsos_core::pipeline::{
    evaluate, fit, fit_baseline, read_pipeline, run_experiment, write_pipeline, ExperimentReport, Method,
    PipelineConfig,
};

use crate::cli::{
    BenchArgs, Command, EvalArgs, FetchArgs, GenDataArgs, MetricArgs, PlotCommand, PrepArgs, ResampleArgs,
    ResampleMethod, ScatterArgs, TrainArgs,
};
use crate::config::RunConfig;
use crate::fetch::{self, default_data_dir, FetchOutcome, Manifest};
use crate::output::{write_atomic, write_json, write_text};
use crate::plot::{metric_chart_svg, scatter_svg, ScatterPoint, Series};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData(a) => gen_data(a),
        Command::Fetch(a) => fetch_cmd(a),
        Command::Prep(a) => prep(a),
        Command::Resample(a) => resample(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
        Command::Plot(PlotCommand::Scatter(a)) => plot_scatter(a),
        Command::Plot(PlotCommand::Metric(a)) => plot_metric(a),
    }
}

fn load_dataset(path: &Path, label: &str) -> Result<Dataset> {
    let column: LabelColumn = label.parse()?;
    let ds = load_csv(path, &column).with_context(|| format!("cannot load {}", path.display()))?;
    let name = path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(ds.renamed(name))
}

fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    write_atomic(path, |w| Ok(write_csv(ds, w)?))
}

fn read_projection(path: &Path) -> Result<ProjectionMatrix> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    ProjectionMatrix::read_csv(file).with_context(|| format!("cannot read projection {}", path.display()))
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let spec = GenSpec::new(a.dims, a.n_negative, a.ir);
    let ds = generate_synthetic(&spec, &mut RandomStream::new(a.seed))?;
    save_dataset(&a.out, &ds)?;
    let (neg, pos) = ds.class_counts();
    println!("wrote {} ({neg} negative, {pos} positive, {} features)", a.out.display(), ds.n_features());
    Ok(())
}

fn fetch_cmd(a: FetchArgs) -> Result<()> {
    let manifest = Manifest::load(a.data.manifest.as_deref())?;
    let data_dir = a.data.data_dir.unwrap_or_else(default_data_dir);
    let names: Vec<String> = if a.all {
        manifest.datasets.keys().cloned().collect()
    } else {
        a.names.iter().map(|r| r.name().to_string()).collect()
    };
    for name in names {
        let outcome = fetch::fetch(&name, &manifest, &data_dir, a.force)?;
        let what = match outcome {
            FetchOutcome::CacheHit => "cached, checksums verified",
            FetchOutcome::Downloaded => "downloaded",
        };
        println!("{name}: {what} ({})", data_dir.join(&name).display());
    }
    Ok(())
}

fn prep(a: PrepArgs) -> Result<()> {
    let manifest = Manifest::load(a.data.manifest.as_deref())?;
    let data_dir = a.data.data_dir.unwrap_or_else(default_data_dir);
    fetch::verify_cache(a.name.name(), manifest.entry(a.name.name())?, &data_dir)?;
    let ds = prepare_recipe(a.name, &data_dir, a.ir, a.seed)?;
    save_dataset(&a.out, &ds)?;
    let (neg, pos) = ds.class_counts();
    println!("wrote {} ({neg} negative, {pos} positive, {} features)", a.out.display(), ds.n_features());
    Ok(())
}

fn prepare_recipe(recipe: Recipe, data_dir: &Path, ir: f64, seed: u64) -> Result<Dataset> {
    let dir = recipes::cache_dir(data_dir, recipe);
    recipes::prepare(recipe, &dir, ir, &mut RandomStream::new(seed))
        .with_context(|| format!("cannot prepare {recipe} at IR {ir}"))
}

fn resample(a: ResampleArgs) -> Result<()> {
    let mut ds = load_dataset(&a.input, &a.label)?;
    if let Some(p) = &a.projection {
        ds = read_projection(p)?.project_dataset(&ds)?;
    }
    let mut stream = RandomStream::new(a.seed);
    let data = match a.method {
        ResampleMethod::Gss => {
            let cfg = GssConfig { k: a.k, p_delta: a.p_delta, max_rounds: a.max_rounds, ..Default::default() };
            let outcome = gss_oversample(&ds, &cfg, &mut stream)?;
            println!(
                "gss: {:?}, generated {}, retained {}, rounds {}",
                outcome.status, outcome.generated, outcome.retained, outcome.rounds
            );
            outcome.data
        }
        ResampleMethod::Smote => smote_oversample(&ds, a.k, &mut stream)?,
    };
    write_atomic(&a.out, |w| Ok(data.write_csv(w)?))?;
    println!(
        "wrote {} ({} real, {} synthetic rows)",
        a.out.display(),
        data.count(Origin::Real),
        data.count(Origin::Synthetic)
    );
    Ok(())
}

/// Reads pipeline settings from a run config or a bare pipeline object.
fn load_pipeline_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("config {} is not JSON", path.display()))?;
    let cfg = if value.get("datasets").is_some() {
        let run: RunConfig = serde_json::from_value(value).with_context(|| format!("config {} is invalid", path.display()))?;
        run.pipeline
    } else {
        serde_json::from_value(value).with_context(|| format!("config {} is invalid", path.display()))?
    };
    cfg.validate().context("invalid pipeline configuration")?;
    Ok(cfg)
}

fn train(a: TrainArgs) -> Result<()> {
    let ds = load_dataset(&a.input, &a.label)?;
    let cfg = match &a.config {
        Some(p) => load_pipeline_config(p)?,
        None => PipelineConfig::default(),
    };
    let stream = RandomStream::new(a.seed);
    let pipeline = match a.method {
        Method::Wsos => fit(&ds, &cfg, &stream)?,
        other => fit_baseline(other, &ds, &cfg, &stream)?,
    };
    write_atomic(&a.out, |w| Ok(write_pipeline(&pipeline, w)?))?;
    if let Some(path) = &a.projection_out {
        let Some(p) = &pipeline.projection else {
            bail!("method {} learns no projection; drop --projection-out", a.method);
        };
        write_atomic(path, |w| Ok(p.write_csv(w)?))?;
    }
    println!("wrote {} ({} heads)", a.out.display(), pipeline.model.n_heads());
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    dataset: String,
    rows: usize,
    confusion: ConfusionMatrix,
    metrics: MetricSet,
}

fn eval(a: EvalArgs) -> Result<()> {
    let file = File::open(&a.model).with_context(|| format!("cannot open {}", a.model.display()))?;
    let pipeline = read_pipeline(file).with_context(|| format!("cannot read model {}", a.model.display()))?;
    let ds = load_dataset(&a.input, &a.label)?;
    let result = evaluate(&pipeline, &ds)?;
    let report = EvalReport {
        dataset: ds.name().to_string(),
        rows: ds.n_rows(),
        confusion: result.confusion,
        metrics: result.metrics,
    };
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(out) = &a.out {
        write_text(out, &(text + "\n"))?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(dir) = a.out_dir {
        cfg.output_dir = dir;
    }
    if let Some(seeds) = a.seeds {
        cfg.pipeline.seeds = seeds;
    }
    if let Some(folds) = a.folds {
        cfg.pipeline.folds = folds;
    }
    if let Some(methods) = a.methods {
        cfg.methods = methods;
    }
    if let Some(dir) = a.data_dir {
        cfg.data_dir = Some(dir);
    }
    if cfg.data_dir.is_none() {
        cfg.data_dir = Some(default_data_dir());
    }
    cfg.validate()?;
    let out_dir = cfg.output_dir.clone();
    write_json(&out_dir.join("resolved-config.json"), &cfg)?;

    let manifest = Manifest::load(a.manifest.as_deref())?;
    let data_dir: PathBuf = cfg.data_dir.clone().expect("filled above");
    let datasets = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(i, spec)| spec.load(&data_dir, &manifest).with_context(|| format!("cannot load datasets[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    for ds in &datasets {
        let (neg, pos) = ds.class_counts();
        log::info!("dataset {}: {neg} negative, {pos} positive, {} features", ds.name(), ds.n_features());
    }
    let report = run_experiment(&datasets, &cfg.methods, &cfg.pipeline)?;
    write_json(&out_dir.join("results.json"), &report)?;
    write_atomic(&out_dir.join("results.csv"), |w| Ok(report.write_csv(w)?))?;
    print_summary(&report)?;
    println!("results written to {}", out_dir.display());
    Ok(())
}

fn print_summary(report: &ExperimentReport) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{:<28} {:<10} {:>15} {:>15} {:>15}", "dataset", "method", "F", "G", "F+G")?;
    for a in &report.aggregates {
        let cell = |m: f64, s: f64| format!("{m:.4}±{s:.4}");
        writeln!(
            out,
            "{:<28} {:<10} {:>15} {:>15} {:>15}",
            a.dataset,
            a.method,
            cell(a.mean.f_measure, a.sd.f_measure),
            cell(a.mean.g_mean, a.sd.g_mean),
            cell(a.mean.f_plus_g, a.sd.f_plus_g)
        )?;
    }
    for entry in &report.ranks {
        let ranks: Vec<String> = entry
            .table
            .methods
            .iter()
            .zip(&entry.table.mean_ranks)
            .map(|(m, r)| format!("{m}={r:.2}"))
            .collect();
        writeln!(out, "mean rank ({}): {}", entry.metric.name(), ranks.join(" "))?;
    }
    Ok(())
}

fn has_origin_column(path: &Path) -> Result<bool> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    Ok(first.trim_end().split(',').any(|c| c.trim() == "origin"))
}

fn plot_scatter(a: ScatterArgs) -> Result<()> {
    let projection = a.projection.as_deref().map(read_projection).transpose()?;
    let (x, positive, synthetic) = if has_origin_column(&a.input)? {
        let file = File::open(&a.input)?;
        let soft = SoftLabeledDataset::read_csv(file).with_context(|| format!("cannot read {}", a.input.display()))?;
        let pos: Vec<bool> = soft.soft_labels().column(1).iter().map(|&p| p >= 0.5).collect();
        let syn: Vec<bool> = soft.origin().iter().map(|o| *o == Origin::Synthetic).collect();
        (soft.features().clone(), pos, syn)
    } else {
        let ds = load_dataset(&a.input, &a.label)?;
        let pos = ds.labels().iter().map(|&l| l == 1).collect();
        (ds.features().clone(), pos, vec![false; ds.n_rows()])
    };
    let x = match &projection {
        Some(p) => p.project(x.view())?,
        None => x,
    };
    if x.ncols() != 2 {
        bail!("scatter needs 2 columns, input has {}; pass --projection to reduce it", x.ncols());
    }
    let points: Vec<ScatterPoint> = (0..x.nrows())
        .map(|i| ScatterPoint { x: x[[i, 0]], y: x[[i, 1]], positive: positive[i], synthetic: synthetic[i] })
        .collect();
    let title = a.title.unwrap_or_else(|| a.input.display().to_string());
    write_text(&a.out, &scatter_svg(&points, &title))?;
    println!("wrote {} ({} points)", a.out.display(), points.len());
    Ok(())
}

fn plot_metric(a: MetricArgs) -> Result<()> {
    let file = File::open(&a.results).with_context(|| format!("cannot open {}", a.results.display()))?;
    let report: ExperimentReport =
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("{} is not a results file", a.results.display()))?;
    // Round to 1e-6 so that e.g. 2000/40 and 50.0 share a tick.
    let key = |ir: f64| (ir * 1e6).round() as i64;
    let mut irs: BTreeMap<i64, Vec<&str>> = BTreeMap::new();
    for info in &report.datasets {
        irs.entry(key(info.imbalance_ratio)).or_default().push(info.name.as_str());
    }
    let labels: Vec<String> = irs.keys().map(|k| format_ir(*k as f64 / 1e6)).collect();
    let series: Vec<Series> = report
        .methods
        .iter()
        .map(|&m| Series {
            label: m.to_string(),
            values: irs
                .values()
                .map(|names| {
                    let vals: Vec<f64> = names
                        .iter()
                        .filter_map(|n| report.aggregate(n, m))
                        .map(|agg| a.metric.of(&agg.mean))
                        .collect();
                    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
                })
                .collect(),
        })
        .collect();
    let title = a.title.unwrap_or_else(|| format!("{} vs imbalance ratio", a.metric.name()));
    write_text(&a.out, &metric_chart_svg(&labels, &series, &title, a.metric.name()))?;
    println!("wrote {} ({} x-ticks, {} series)", a.out.display(), labels.len(), series.len());
    Ok(())
}

fn format_ir(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}
