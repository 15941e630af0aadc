//! Preprocessing recipes that turn cached UCI raw files into binary datasets.
//!
//! * abalone: sex one-hot encoded, 7 physical measurements; rings < 9 is the
//!   young group. The young group is the minority and becomes the positive
//!   class so that 2000 negatives can be drawn from the older group.
//! * covertype: Spruce-Fir (type 1) negative, Lodgepole Pine (type 2) positive.
//! * gisette: train + validation pools, label -1 negative, +1 positive,
//!   projected to 100 principal components fitted on the whole pool.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{pca_reduce, subsample_class, subsample_to_ir, Dataset, NEGATIVE};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;

pub const ABALONE_YOUNG_RINGS: u32 = 9;
pub const GISETTE_DIMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    Abalone,
    Covertype,
    Gisette,
}

impl Recipe {
    pub const ALL: [Recipe; 3] = [Recipe::Abalone, Recipe::Covertype, Recipe::Gisette];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Abalone => "abalone",
            Recipe::Covertype => "covertype",
            Recipe::Gisette => "gisette",
        }
    }

    /// Negative-class size of every prepared dataset.
    pub fn n_negative(self) -> usize {
        match self {
            Recipe::Abalone => 2000,
            Recipe::Covertype => 5000,
            Recipe::Gisette => 3500,
        }
    }

    /// Raw file names expected in the recipe's cache directory.
    pub fn raw_files(self) -> &'static [&'static str] {
        match self {
            Recipe::Abalone => &["abalone.data"],
            Recipe::Covertype => &["covtype.data.gz"],
            Recipe::Gisette => &[
                "gisette_train.data",
                "gisette_train.labels",
                "gisette_valid.data",
                "gisette_valid.labels",
            ],
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Unknown { kind: "recipe", name: s.to_string() })
    }
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Directory holding one recipe's raw files under a data root.
pub fn cache_dir(data_root: &Path, recipe: Recipe) -> PathBuf {
    data_root.join(recipe.name())
}

/// Parses the cached raw files into the full labelled pool.
pub fn load_raw(recipe: Recipe, dir: &Path) -> Result<Dataset> {
    match recipe {
        Recipe::Abalone => load_abalone(&dir.join("abalone.data")),
        Recipe::Covertype => load_covertype(&dir.join("covtype.data.gz")),
        Recipe::Gisette => load_gisette(dir),
    }
}

/// Builds the recipe's dataset: fixed negative count, positives at `ir`.
pub fn prepare(recipe: Recipe, dir: &Path, ir: f64, stream: &mut RandomStream) -> Result<Dataset> {
    let mut pool = load_raw(recipe, dir)?;
    if recipe == Recipe::Gisette {
        pool = pca_reduce(&pool, GISETTE_DIMS)?.0;
    }
    let with_negatives = subsample_class(&pool, NEGATIVE, recipe.n_negative(), stream)?;
    let out = subsample_to_ir(&with_negatives, ir, stream)?;
    Ok(out.renamed(format!("{}-IR{}", recipe.name(), ir)))
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::read::GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(reader)))
}

fn lines(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push(line);
        }
    }
    if out.is_empty() {
        return Err(Error::Empty(format!("{} has no rows", path.display())));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(cell: &str, row: usize, column: usize) -> Result<T> {
    cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        message: format!("`{cell}` is not a number"),
    })
}

fn load_abalone(path: &Path) -> Result<Dataset> {
    let rows = lines(path)?;
    let mut x = Array2::zeros((rows.len(), 10));
    let mut y = Vec::with_capacity(rows.len());
    for (r, line) in rows.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 9 {
            return Err(Error::Format(format!("abalone row {} has {} fields", r + 1, cells.len())));
        }
        let sex_col = match cells[0].trim() {
            "M" => 0,
            "F" => 1,
            "I" => 2,
            other => {
                return Err(Error::Parse {
                    row: r + 1,
                    column: "sex".into(),
                    message: format!("unknown sex `{other}`"),
                })
            }
        };
        x[[r, sex_col]] = 1.0;
        for j in 1..8 {
            x[[r, 2 + j]] = parse_num(cells[j], r + 1, j)?;
        }
        let rings: u32 = parse_num(cells[8], r + 1, 8)?;
        y.push(u8::from(rings < ABALONE_YOUNG_RINGS));
    }
    let names = [
        "sex_m", "sex_f", "sex_i", "length", "diameter", "height", "whole_weight",
        "shucked_weight", "viscera_weight", "shell_weight",
    ];
    Dataset::with_feature_names("abalone", names.map(String::from).to_vec(), x, y)
}

fn load_covertype(path: &Path) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut y = Vec::new();
    for (r, line) in lines(path)?.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 55 {
            return Err(Error::Format(format!("covertype row {} has {} fields", r + 1, cells.len())));
        }
        let label = match parse_num::<u8>(cells[54], r + 1, 54)? {
            1 => 0,
            2 => 1,
            _ => continue,
        };
        for (j, c) in cells[..54].iter().enumerate() {
            values.push(parse_num::<f64>(c, r + 1, j)?);
        }
        y.push(label);
    }
    let x = Array2::from_shape_vec((y.len(), 54), values).map_err(|e| Error::Format(e.to_string()))?;
    Dataset::new("covertype", x, y)
}

fn load_gisette(dir: &Path) -> Result<Dataset> {
    let mut parts = Vec::new();
    for split in ["train", "valid"] {
        let data = lines(&dir.join(format!("gisette_{split}.data")))?;
        let labels = lines(&dir.join(format!("gisette_{split}.labels")))?;
        if data.len() != labels.len() {
            return Err(Error::Format(format!(
                "gisette {split}: {} data rows but {} labels",
                data.len(),
                labels.len()
            )));
        }
        let width = data[0].split_whitespace().count();
        let mut values = Vec::with_capacity(data.len() * width);
        let mut y = Vec::with_capacity(data.len());
        for (r, (line, label)) in data.iter().zip(&labels).enumerate() {
            let before = values.len();
            for (j, c) in line.split_whitespace().enumerate() {
                values.push(parse_num::<f64>(c, r + 1, j)?);
            }
            if values.len() - before != width {
                return Err(Error::Format(format!("gisette {split} row {} is ragged", r + 1)));
            }
            y.push(match parse_num::<i32>(label, r + 1, 0)? {
                -1 => 0,
                1 => 1,
                v => return Err(Error::LabelDomain { row: r + 1, value: v.to_string() }),
            });
        }
        let x = Array2::from_shape_vec((y.len(), width), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        parts.push(Dataset::new("gisette", x, y)?);
    }
    parts[0].concat(&parts[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn recipe_names_round_trip() {
        for r in Recipe::ALL {
            assert_eq!(r.name().parse::<Recipe>().unwrap(), r);
        }
        assert!("iris".parse::<Recipe>().is_err());
    }

    #[test]
    fn abalone_rows_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = File::create(dir.path().join("abalone.data")).unwrap();
        writeln!(f, "M,0.455,0.365,0.095,0.514,0.2245,0.101,0.15,15").unwrap();
        writeln!(f, "I,0.33,0.255,0.08,0.205,0.0895,0.0395,0.055,7").unwrap();
        writeln!(f, "F,0.53,0.42,0.135,0.677,0.2565,0.1415,0.21,9").unwrap();
        drop(f);
        let ds = load_raw(Recipe::Abalone, dir.path()).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.features().row(1).to_vec()[..3], [0.0, 0.0, 1.0]);
        assert_eq!(ds.features()[[0, 3]], 0.455);
    }

    #[test]
    fn bad_abalone_sex() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("abalone.data"), "X,1,1,1,1,1,1,1,3\n").unwrap();
        assert!(matches!(load_raw(Recipe::Abalone, dir.path()), Err(Error::Parse { .. })));
    }
}
