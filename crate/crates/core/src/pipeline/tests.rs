use super::*;
use crate::dataset::{generate_synthetic, GenSpec};
use ndarray::{array, Array2};

fn blobs(n_neg: usize, n_pos: usize, gap: f64, seed: u64) -> Dataset {
    let mut s = RandomStream::new(seed);
    let n = n_neg + n_pos;
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n_neg)).collect();
    let x = Array2::from_shape_fn((n, 3), |(i, c)| {
        let shift = if labels[i] == 1 && c == 0 { gap } else { 0.0 };
        shift + s.normal(0.0, 0.5).unwrap()
    });
    Dataset::new("blobs", x, labels).unwrap()
}

fn quick_cfg() -> PipelineConfig {
    PipelineConfig { train: TrainConfig { epochs: 30, ..Default::default() }, ..Default::default() }
}

fn serialized(p: &TrainedPipeline) -> Vec<u8> {
    let mut buf = Vec::new();
    write_pipeline(p, &mut buf).unwrap();
    buf
}

#[test]
fn single_head_balanced_fixture() {
    let ds = blobs(10, 10, 3.0, 1);
    let cfg = PipelineConfig { bef: BefConfig { k: 1, ir_prime: 1.0 }, ..quick_cfg() };
    let p = fit(&ds, &cfg, &RandomStream::new(0)).unwrap();
    assert_eq!(p.model.head_weights, vec![1.0]);
    assert_eq!(p.projection.as_ref().unwrap().input_dims(), 3);
}

#[test]
fn fit_is_deterministic_and_round_trips() {
    let ds = blobs(60, 12, 2.0, 2);
    let a = fit(&ds, &quick_cfg(), &RandomStream::new(9)).unwrap();
    let b = fit(&ds, &quick_cfg(), &RandomStream::new(9)).unwrap();
    assert_eq!(serialized(&a), serialized(&b));
    let back = read_pipeline(serialized(&a).as_slice()).unwrap();
    assert_eq!(back, a);
    let c = fit(&ds, &quick_cfg(), &RandomStream::new(10)).unwrap();
    assert_ne!(serialized(&a), serialized(&c));
}

#[test]
fn weights_are_normalized() {
    let ds = blobs(60, 12, 2.0, 3);
    let (p, diag) = fit_with_diagnostics(&ds, &quick_cfg(), &RandomStream::new(1)).unwrap();
    assert!((p.model.head_weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    assert_eq!(diag.gss_status.len(), 5);
    let (q0, q1) = diag.csnca_q.unwrap();
    assert!(q1 >= q0);
}

#[test]
fn separable_fixture_scores_well_on_itself() {
    let ds = blobs(80, 20, 4.0, 4);
    let p = fit(&ds, &PipelineConfig::default(), &RandomStream::new(2)).unwrap();
    let eval = evaluate(&p, &ds).unwrap();
    assert!(eval.metrics.g_mean >= 0.95, "{:?}", eval.metrics);
    assert_eq!(eval.metrics, compute_metrics(&eval.confusion).unwrap());
}

#[test]
fn constant_positive_classifier_has_zero_g_mean() {
    let ds = blobs(30, 10, 2.0, 5);
    let mut p = fit(&ds, &quick_cfg(), &RandomStream::new(3)).unwrap();
    for head in &mut p.model.heads {
        let out = head.last_mut().unwrap();
        out.w.fill(0.0);
        out.b = array![0.0, 50.0];
    }
    let eval = evaluate(&p, &ds).unwrap();
    assert!(eval.prediction.labels.iter().all(|&l| l == 1));
    assert_eq!(eval.metrics.g_mean, 0.0);
}

#[test]
fn duplicated_test_rows_get_the_same_label() {
    let ds = blobs(40, 10, 1.5, 6);
    let p = fit(&ds, &quick_cfg(), &RandomStream::new(4)).unwrap();
    let once = evaluate(&p, &ds).unwrap().prediction.labels;
    let rows: Vec<usize> = (0..ds.n_rows()).chain([3, 3, 45]).collect();
    let twice = evaluate(&p, &ds.select(&rows)).unwrap().prediction.labels;
    assert_eq!(&twice[..ds.n_rows()], once.as_slice());
    assert_eq!(twice[ds.n_rows()], once[3]);
    assert_eq!(twice[ds.n_rows() + 2], once[45]);
}

#[test]
fn feature_count_mismatch_is_rejected() {
    let ds = blobs(30, 10, 2.0, 7);
    let p = fit(&ds, &quick_cfg(), &RandomStream::new(0)).unwrap();
    let narrow = Dataset::new("n", array![[0.0, 1.0], [1.0, 0.0]], vec![0, 1]).unwrap();
    assert!(matches!(evaluate(&p, &narrow), Err(Error::DimensionMismatch(_))));
}

#[test]
fn errors_name_the_step() {
    let ds = blobs(30, 10, 2.0, 8);
    // Constant features scale to zero, so every projected point coincides.
    let flat = ds.with_features(Array2::from_elem((ds.n_rows(), 3), 4.0)).unwrap();
    let mut cfg = quick_cfg();
    match fit(&flat, &cfg, &RandomStream::new(0)) {
        Err(Error::Step { step: 3, .. }) => {}
        other => panic!("expected step 3 error, got {other:?}"),
    }
    cfg.bef.k = 0;
    assert!(matches!(fit(&ds, &cfg, &RandomStream::new(0)), Err(Error::InvalidArgument { field: "bef.k", .. })));
}

#[test]
fn baseline_training_sets() {
    let balanced = blobs(15, 15, 2.0, 9);
    let smote = baseline_training_set(Method::SmoteNn, &balanced, &quick_cfg(), &mut RandomStream::new(0)).unwrap();
    assert_eq!(smote.n_rows(), 30);
    let skewed = blobs(200, 20, 2.0, 10);
    let rus = baseline_training_set(Method::RusNn, &skewed, &quick_cfg(), &mut RandomStream::new(0)).unwrap();
    assert_eq!(rus.n_rows(), 40);
    assert!((rus.positive_mass() - 20.0).abs() < 1e-12);
}

#[test]
fn baselines_are_reproducible_and_named() {
    let ds = blobs(60, 15, 2.0, 11);
    let cfg = quick_cfg();
    for name in ["smote_nn", "rus_nn"] {
        let a = run_baseline(name, &ds, &ds, &cfg, &RandomStream::new(5)).unwrap();
        let b = run_baseline(name, &ds, &ds, &cfg, &RandomStream::new(5)).unwrap();
        assert_eq!(a.metrics, b.metrics);
    }
    assert!(matches!(run_baseline("svm", &ds, &ds, &cfg, &RandomStream::new(0)), Err(Error::Unknown { .. })));
    assert!(matches!(run_baseline("wsos", &ds, &ds, &cfg, &RandomStream::new(0)), Err(Error::Unknown { .. })));
}

#[test]
fn experiment_cell_count_and_single_method_rank() {
    let ds = blobs(40, 10, 2.0, 12);
    let cfg = PipelineConfig { folds: 2, seeds: vec![3], ..quick_cfg() };
    let report = run_experiment(&[ds], &[Method::RusNn], &cfg).unwrap();
    assert_eq!(report.cells.len(), 2);
    assert_eq!(report.schema_version, REPORT_SCHEMA_VERSION);
    for entry in &report.ranks {
        assert_eq!(entry.table.mean_ranks, vec![1.0]);
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
}

#[test]
fn experiment_is_deterministic() {
    let ds = blobs(40, 10, 2.0, 13);
    let cfg = PipelineConfig { folds: 2, seeds: vec![1, 2], ..quick_cfg() };
    let a = run_experiment(&[ds.clone()], &[Method::Wsos, Method::SmoteNn], &cfg).unwrap();
    let b = run_experiment(&[ds], &[Method::Wsos, Method::SmoteNn], &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.cells.len(), 8);
    assert_eq!(a.per_seed_mean("blobs", Method::Wsos, crate::metrics::Metric::GMean).len(), 2);
}

#[test]
fn held_out_rows_never_reach_fit() {
    let ds = blobs(50, 10, 2.0, 14);
    let split = stratified_kfold_for_test(&ds);
    let (train, _) = split.split(&ds, 0).unwrap();
    let fitted = fit(&train, &quick_cfg(), &RandomStream::new(8)).unwrap();
    // Overwrite every held-out row; the fitted pipeline must not move.
    let mut x = ds.features().clone();
    for i in split.test_rows(0) {
        x.row_mut(i).fill(1e6);
    }
    let poisoned = ds.with_features(x).unwrap();
    let (train2, test2) = split.split(&poisoned, 0).unwrap();
    assert!(test2.features().iter().all(|&v| v == 1e6));
    let refit = fit(&train2, &quick_cfg(), &RandomStream::new(8)).unwrap();
    assert_eq!(serialized(&fitted), serialized(&refit));
}

fn stratified_kfold_for_test(ds: &Dataset) -> crate::dataset::FoldSplit {
    crate::dataset::stratified_kfold(ds, 5, &mut RandomStream::new(0)).unwrap()
}

#[test]
fn training_beats_untrained_ablation() {
    let ds = generate_synthetic(&GenSpec::new(20, 1000, 10.0), &mut RandomStream::new(15)).unwrap();
    let trained = fit(&ds, &PipelineConfig::default(), &RandomStream::new(1)).unwrap();
    let zero = PipelineConfig { train: TrainConfig { epochs: 0, ..Default::default() }, ..Default::default() };
    let untrained = fit(&ds, &zero, &RandomStream::new(1)).unwrap();
    let a = evaluate(&trained, &ds).unwrap().metrics.f_plus_g;
    let b = evaluate(&untrained, &ds).unwrap().metrics.f_plus_g;
    assert!(a >= b, "trained {a} < untrained {b}");
}

#[test]
fn method_names_parse() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("xgboost".parse::<Method>().is_err());
}
