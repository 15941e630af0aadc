use std::io::{Read, Write};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, POSITIVE};
use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Real,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Real => "real",
            Origin::Synthetic => "synthetic",
        }
    }
}

/// Features with two-component probability labels `[p(negative), p(positive)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabeledDataset {
    features: Matrix,
    soft_labels: Matrix,
    origin: Vec<Origin>,
}

impl SoftLabeledDataset {
    pub fn new(features: Matrix, soft_labels: Matrix, origin: Vec<Origin>) -> Result<Self> {
        let n = features.nrows();
        if soft_labels.dim() != (n, 2) || origin.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} feature rows, {:?} labels, {} origins",
                soft_labels.dim(),
                origin.len()
            )));
        }
        ensure_finite(features.iter(), "soft-labelled features")?;
        for (i, row) in soft_labels.rows().into_iter().enumerate() {
            let ok = row.iter().all(|v| (0.0..=1.0).contains(v)) && (row.sum() - 1.0).abs() <= 1e-12;
            if !ok {
                return Err(Error::invalid("soft_labels", format!("row {i} is not a distribution")));
            }
        }
        Ok(Self { features, soft_labels, origin })
    }

    /// One-hot labels for every row of a hard-labelled dataset.
    pub fn from_hard(ds: &Dataset) -> Self {
        let mut soft = Array2::zeros((ds.n_rows(), 2));
        for (i, &l) in ds.labels().iter().enumerate() {
            soft[[i, usize::from(l)]] = 1.0;
        }
        Self { features: ds.features().clone(), soft_labels: soft, origin: vec![Origin::Real; ds.n_rows()] }
    }

    /// Appends synthetic rows labelled `[1 - f, f]`.
    pub fn push_synthetic(&mut self, rows: &Matrix, f: &[f64]) -> Result<()> {
        if rows.nrows() != f.len() || (rows.nrows() > 0 && rows.ncols() != self.features.ncols()) {
            return Err(Error::DimensionMismatch("synthetic rows and labels disagree".into()));
        }
        if rows.nrows() == 0 {
            return Ok(());
        }
        let labels = Array2::from_shape_fn((f.len(), 2), |(i, c)| if c == 1 { f[i] } else { 1.0 - f[i] });
        self.features = ndarray::concatenate(Axis(0), &[self.features.view(), rows.view()])
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        self.soft_labels = ndarray::concatenate(Axis(0), &[self.soft_labels.view(), labels.view()])
            .expect("two columns");
        self.origin.extend(std::iter::repeat(Origin::Synthetic).take(f.len()));
        Ok(())
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn soft_labels(&self) -> &Matrix {
        &self.soft_labels
    }

    pub fn origin(&self) -> &[Origin] {
        &self.origin
    }

    pub fn n_rows(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn count(&self, origin: Origin) -> usize {
        self.origin.iter().filter(|&&o| o == origin).count()
    }

    /// Total positive-label mass.
    pub fn positive_mass(&self) -> f64 {
        self.soft_labels.column(usize::from(POSITIVE)).sum()
    }

    /// `f1..fd, p_neg, p_pos, origin`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.n_features()).map(|j| format!("f{j}")).collect();
        header.extend(["p_neg", "p_pos", "origin"].map(String::from));
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.features.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.soft_labels[[i, 0]].to_string());
            rec.push(self.soft_labels[[i, 1]].to_string());
            rec.push(self.origin[i].as_str().to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<soft-label writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let w = headers.len();
        if w < 4 || &headers[w - 3] != "p_neg" || &headers[w - 2] != "p_pos" || &headers[w - 1] != "origin" {
            return Err(Error::Format("expected trailing columns p_neg, p_pos, origin".into()));
        }
        let d = w - 3;
        let (mut feats, mut labels, mut origin) = (Vec::new(), Vec::new(), Vec::new());
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for j in 0..d + 2 {
                let v: f64 = rec[j].parse().map_err(|_| Error::Parse {
                    row: r + 1,
                    column: headers[j].to_string(),
                    message: format!("`{}` is not a number", &rec[j]),
                })?;
                if j < d { feats.push(v) } else { labels.push(v) }
            }
            origin.push(match &rec[d + 2] {
                "real" => Origin::Real,
                "synthetic" => Origin::Synthetic,
                o => {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: "origin".into(),
                        message: format!("unknown origin `{o}`"),
                    })
                }
            });
        }
        let n = origin.len();
        let features = Array2::from_shape_vec((n, d), feats).map_err(|e| Error::Format(e.to_string()))?;
        let soft = Array2::from_shape_vec((n, 2), labels).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(features, soft, origin)
    }
}
