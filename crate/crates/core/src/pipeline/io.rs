//! Plain-text pipeline files: a short header with scaler, threshold and
//! projection, followed by the ensemble model in its own format.
//!
//! ```text
//! wsos-pipeline 1
//! threshold <t>
//! scaler_mean <m_1> ... <m_D>
//! scaler_sd <s_1> ... <s_D>
//! projection <d> <D>          (or `projection none`)
//! <row 0 of P>
//! ...
//! wsos-ensemble 1
//! ...
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use ndarray::Array2;

use super::TrainedPipeline;
use crate::csnca::ProjectionMatrix;
use crate::dataset::ScalerParams;
use crate::ensemble::{read_model, write_model};
use crate::error::{Error, Result};

pub const PIPELINE_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "wsos-pipeline";

fn join(values: impl IntoIterator<Item = impl std::fmt::Display>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_pipeline<W: Write>(pipeline: &TrainedPipeline, mut out: W) -> Result<()> {
    let io = |e| Error::io("<pipeline>", e);
    writeln!(out, "{MAGIC} {PIPELINE_FORMAT_VERSION}").map_err(io)?;
    writeln!(out, "threshold {}", pipeline.threshold).map_err(io)?;
    writeln!(out, "scaler_mean {}", join(&pipeline.scaler.mean)).map_err(io)?;
    writeln!(out, "scaler_sd {}", join(&pipeline.scaler.sd)).map_err(io)?;
    match &pipeline.projection {
        Some(p) => {
            let m = p.matrix();
            writeln!(out, "projection {} {}", m.nrows(), m.ncols()).map_err(io)?;
            for row in m.rows() {
                writeln!(out, "{}", join(row.iter())).map_err(io)?;
            }
        }
        None => writeln!(out, "projection none").map_err(io)?,
    }
    write_model(&pipeline.model, out)
}

fn parse_line(line: &str, key: &str, line_no: usize) -> Result<Vec<f64>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::Format(format!("pipeline line {line_no}: expected `{key}`")));
    }
    parts
        .map(|p| p.parse().map_err(|_| Error::Format(format!("pipeline line {line_no}: bad number `{p}`"))))
        .collect()
}

pub fn read_pipeline<R: Read>(input: R) -> Result<TrainedPipeline> {
    let mut reader = BufReader::new(input);
    let mut line_no = 0;
    let mut next = |reader: &mut BufReader<R>| -> Result<String> {
        line_no += 1;
        let mut s = String::new();
        if reader.read_line(&mut s).map_err(|e| Error::io("<pipeline>", e))? == 0 {
            return Err(Error::Format(format!("pipeline file ends early at line {line_no}")));
        }
        Ok(s.trim_end().to_string())
    };
    let header = next(&mut reader)?;
    if header != format!("{MAGIC} {PIPELINE_FORMAT_VERSION}") {
        return Err(Error::Format(format!("not a version {PIPELINE_FORMAT_VERSION} pipeline file: `{header}`")));
    }
    let threshold = match parse_line(&next(&mut reader)?, "threshold", 2)?.as_slice() {
        [t] => *t,
        _ => return Err(Error::Format("pipeline line 2: `threshold` takes one value".into())),
    };
    let mean = parse_line(&next(&mut reader)?, "scaler_mean", 3)?;
    let sd = parse_line(&next(&mut reader)?, "scaler_sd", 4)?;
    if mean.len() != sd.len() {
        return Err(Error::Format("scaler mean and sd lengths differ".into()));
    }
    let proj_line = next(&mut reader)?;
    let projection = if proj_line == "projection none" {
        None
    } else {
        let shape = parse_line(&proj_line, "projection", 5)?;
        let [d, cols] = shape.as_slice() else {
            return Err(Error::Format("pipeline line 5: expected `projection <d> <D>`".into()));
        };
        let (d, cols) = (*d as usize, *cols as usize);
        if cols != mean.len() {
            return Err(Error::Format(format!("projection has {cols} columns, scaler {} features", mean.len())));
        }
        let mut m = Array2::zeros((d, cols));
        for r in 0..d {
            let line = next(&mut reader)?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|p| p.parse().map_err(|_| Error::Format(format!("bad projection value `{p}`"))))
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::Format(format!("projection row {r} has {} values, expected {cols}", row.len())));
            }
            m.row_mut(r).assign(&ndarray::Array1::from(row));
        }
        Some(ProjectionMatrix::new(m)?)
    };
    let model = read_model(reader)?;
    let expected = projection.as_ref().map_or(mean.len(), ProjectionMatrix::target_dims);
    if model.arch.input_dim != expected {
        return Err(Error::Format(format!("model expects {} inputs, pipeline produces {expected}", model.arch.input_dim)));
    }
    Ok(TrainedPipeline { scaler: ScalerParams { mean, sd }, projection, model, threshold })
}
