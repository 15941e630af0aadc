//! Plain-text model files.
//!
//! ```text
//! wsos-ensemble 1
//! input_dim <d>
//! trunk <w1> <w2> ...
//! heads <K>
//! head_hidden <h>
//! head_weights <w_1> ... <w_K>
//! layer <rows> <cols>
//! <row 0 of W, space separated>
//! ...
//! bias <b_1> ... <b_cols>
//! ```
//!
//! Layers appear as the trunk in order, then each head's hidden and output
//! layer. Numbers use the shortest decimal form that parses back to the same
//! `f64`, so a write/read cycle is lossless.

use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array1, Array2};

use super::network::{Dense, EnsembleModel, NetworkArch};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "wsos-ensemble";

fn join(values: impl IntoIterator<Item = impl std::fmt::Display>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_layer<W: Write>(out: &mut W, layer: &Dense) -> std::io::Result<()> {
    writeln!(out, "layer {} {}", layer.w.nrows(), layer.w.ncols())?;
    for row in layer.w.rows() {
        writeln!(out, "{}", join(row.iter()))?;
    }
    writeln!(out, "bias {}", join(layer.b.iter()))
}

pub fn write_model<W: Write>(model: &EnsembleModel, mut out: W) -> Result<()> {
    let a = &model.arch;
    let io = |e| Error::io("<model>", e);
    writeln!(out, "{MAGIC} {MODEL_FORMAT_VERSION}").map_err(io)?;
    writeln!(out, "input_dim {}", a.input_dim).map_err(io)?;
    writeln!(out, "trunk {}", join(&a.trunk)).map_err(io)?;
    writeln!(out, "heads {}", a.heads).map_err(io)?;
    writeln!(out, "head_hidden {}", a.head_hidden).map_err(io)?;
    writeln!(out, "head_weights {}", join(&model.head_weights)).map_err(io)?;
    for layer in model.trunk.iter().chain(model.heads.iter().flatten()) {
        write_layer(&mut out, layer).map_err(io)?;
    }
    out.flush().map_err(io)
}

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    line_no: usize,
}

impl<R: Read> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.line_no += 1;
        match self.inner.next() {
            Some(line) => line.map_err(|e| Error::io("<model>", e)),
            None => Err(Error::Format(format!("model file ends early at line {}", self.line_no))),
        }
    }

    fn fail(&self, msg: impl std::fmt::Display) -> Error {
        Error::Format(format!("model line {}: {msg}", self.line_no))
    }

    /// Reads `key v1 v2 ...` and returns the parsed values.
    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.fail(format!("expected `{key}`")));
        }
        parts.map(|p| p.parse().map_err(|_| self.fail(format!("bad value `{p}`")))).collect()
    }

    fn single(&mut self, key: &str) -> Result<usize> {
        match self.keyed::<usize>(key)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(self.fail(format!("`{key}` takes one value"))),
        }
    }

    fn layer(&mut self, rows: usize, cols: usize) -> Result<Dense> {
        let shape = self.keyed::<usize>("layer")?;
        if shape != [rows, cols] {
            return Err(self.fail(format!("expected layer {rows}x{cols}, found {shape:?}")));
        }
        let mut w = Array2::zeros((rows, cols));
        for r in 0..rows {
            let line = self.next_line()?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|p| p.parse().map_err(|_| self.fail(format!("bad number `{p}`"))))
                .collect::<Result<_>>()?;
            if values.len() != cols {
                return Err(self.fail(format!("expected {cols} values, found {}", values.len())));
            }
            w.row_mut(r).assign(&Array1::from(values));
        }
        let b: Vec<f64> = self.keyed("bias")?;
        if b.len() != cols {
            return Err(self.fail(format!("expected {cols} bias values, found {}", b.len())));
        }
        Ok(Dense { w, b: Array1::from(b) })
    }
}

pub fn read_model<R: Read>(input: R) -> Result<EnsembleModel> {
    let mut lines = Lines { inner: BufReader::new(input).lines(), line_no: 0 };
    let header = lines.next_line()?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [MAGIC, v] if *v == MODEL_FORMAT_VERSION.to_string() => {}
        [MAGIC, v] => return Err(Error::Format(format!("unsupported model format version {v}"))),
        _ => return Err(Error::Format("not a model file (missing header)".into())),
    }
    let input_dim = lines.single("input_dim")?;
    let trunk: Vec<usize> = lines.keyed("trunk")?;
    let heads = lines.single("heads")?;
    let head_hidden = lines.single("head_hidden")?;
    let arch = NetworkArch { input_dim, trunk, heads, head_hidden };
    arch.validate()?;
    let head_weights: Vec<f64> = lines.keyed("head_weights")?;
    if head_weights.len() != heads {
        return Err(lines.fail(format!("{} head weights for {heads} heads", head_weights.len())));
    }
    let mut width = input_dim;
    let mut trunk_layers = Vec::new();
    for &w in &arch.trunk {
        trunk_layers.push(lines.layer(width, w)?);
        width = w;
    }
    let mut head_layers = Vec::with_capacity(heads);
    for _ in 0..heads {
        head_layers.push(vec![lines.layer(width, head_hidden)?, lines.layer(head_hidden, 2)?]);
    }
    let model = EnsembleModel { arch, trunk: trunk_layers, heads: head_layers, head_weights };
    if !model.is_finite() {
        return Err(Error::NonFinite("model parameters".into()));
    }
    Ok(model)
}
