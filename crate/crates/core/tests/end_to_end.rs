use ndarray::Array2;
use wsos_core::csnca::{self, CsNcaConfig, ProjectionMatrix};
use wsos_core::dataset::{load_csv, write_csv, Dataset, LabelColumn};
use wsos_core::numerics::RandomStream;
use wsos_core::oversample::{gss_oversample, GssConfig, Origin, SoftLabeledDataset};
use wsos_core::pipeline::{evaluate, fit, read_pipeline, write_pipeline, PipelineConfig};

/// One informative feature hidden among high-variance noise features.
fn hidden_signal(n_neg: usize, n_pos: usize, seed: u64) -> Dataset {
    let mut s = RandomStream::new(seed);
    let n = n_neg + n_pos;
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n_neg)).collect();
    let x = Array2::from_shape_fn((n, 8), |(i, c)| {
        if c == 0 {
            (if labels[i] == 1 { 2.5 } else { 0.0 }) + s.normal(0.0, 0.6).unwrap()
        } else {
            s.normal(0.0, 3.0).unwrap()
        }
    });
    Dataset::new("hidden", x, labels).unwrap()
}

/// Leave-one-out 1-NN accuracy with positives weighted by `c`, computed by brute force.
fn weighted_loo_accuracy(z: &Array2<f64>, labels: &[u8], c: f64) -> f64 {
    let n = z.nrows();
    let (mut hit, mut total) = (0.0, 0.0);
    for i in 0..n {
        let mut best = (f64::INFINITY, 0usize);
        for j in (0..n).filter(|&j| j != i) {
            let d: f64 = z.row(i).iter().zip(z.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, j);
            }
        }
        let w = if labels[i] == 1 { c } else { 1.0 };
        total += w;
        if labels[best.1] == labels[i] {
            hit += w;
        }
    }
    hit / total
}

#[test]
fn learned_projection_improves_weighted_loo_accuracy() {
    let ds = hidden_signal(120, 30, 7);
    let cfg = CsNcaConfig { d: 2, ..Default::default() };
    let fitted = csnca::fit(&ds, &cfg).unwrap();
    assert!(fitted.q_final > fitted.q_initial);
    let before = weighted_loo_accuracy(&fitted.initial.project(ds.features().view()).unwrap(), ds.labels(), fitted.c);
    let after = weighted_loo_accuracy(&fitted.projection.project(ds.features().view()).unwrap(), ds.labels(), fitted.c);
    assert!(after > before + 0.1, "LOO accuracy {before} -> {after}");
}

#[test]
fn projection_csv_round_trip() {
    let ds = hidden_signal(40, 10, 1);
    let fitted = csnca::fit(&ds, &CsNcaConfig { d: 3, max_iters: 10, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    fitted.projection.write_csv(&mut buf).unwrap();
    let back = ProjectionMatrix::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, fitted.projection);
}

#[test]
fn csv_to_persisted_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("data.csv");
    write_csv(&hidden_signal(80, 16, 2), std::fs::File::create(&data_path).unwrap()).unwrap();
    let ds = load_csv(&data_path, &LabelColumn::default()).unwrap();
    assert_eq!(ds.class_counts(), (80, 16));

    let mut cfg = PipelineConfig::default();
    cfg.train.epochs = 40;
    let pipeline = fit(&ds, &cfg, &RandomStream::new(3)).unwrap();
    let model_path = dir.path().join("model.txt");
    write_pipeline(&pipeline, std::fs::File::create(&model_path).unwrap()).unwrap();
    let restored = read_pipeline(std::fs::File::open(&model_path).unwrap()).unwrap();
    let a = evaluate(&pipeline, &ds).unwrap();
    let b = evaluate(&restored, &ds).unwrap();
    assert_eq!(a.prediction.positive_probability, b.prediction.positive_probability);
    assert_eq!(a.confusion, b.confusion);
}

#[test]
fn gss_output_survives_csv() {
    let ds = hidden_signal(60, 12, 4);
    let outcome = gss_oversample(&ds, &GssConfig::default(), &mut RandomStream::new(5)).unwrap();
    let data = &outcome.data;
    assert_eq!(data.count(Origin::Real), 72);
    assert_eq!(data.count(Origin::Synthetic), outcome.retained);
    for (row, origin) in data.soft_labels().rows().into_iter().zip(data.origin()) {
        if *origin == Origin::Synthetic {
            assert!(row[1] > 0.5 && row[1] <= 1.0);
        }
    }
    let mut buf = Vec::new();
    data.write_csv(&mut buf).unwrap();
    let back = SoftLabeledDataset::read_csv(buf.as_slice()).unwrap();
    assert_eq!(&back, data);
}
