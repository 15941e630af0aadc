//! Dataset download cache with recorded SHA-256 checksums.
//!
//! Each dataset lives in `<data_dir>/<name>/` next to a `checksums.json`
//! written after a successful download. Later runs verify the cached files
//! against that record (and against the manifest when it pins a checksum)
//! without touching the network.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::write_json;

pub const BUNDLED_MANIFEST: &str = include_str!("../manifest.json");
pub const CHECKSUM_FILE: &str = "checksums.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub datasets: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub files: Vec<ManifestFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub name: String,
    pub url: String,
    /// Hex SHA-256; `null` means the first download defines the checksum.
    pub sha256: Option<String>,
}

impl Manifest {
    pub fn load(path: Option<&Path>) -> Result<Manifest> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read manifest {}", p.display()))?,
            None => BUNDLED_MANIFEST.to_string(),
        };
        let m: Manifest = serde_json::from_str(&text).context("manifest is not valid")?;
        if m.version != 1 {
            bail!("unsupported manifest version {}", m.version);
        }
        Ok(m)
    }

    pub fn entry(&self, name: &str) -> Result<&ManifestEntry> {
        self.datasets.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.datasets.keys().map(String::as_str).collect();
            anyhow!("dataset `{name}` is not in the manifest (known: {})", known.join(", "))
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksumRecord {
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchOutcome {
    CacheHit,
    Downloaded,
}

pub fn default_data_dir() -> PathBuf {
    std::env::var_os("IMB_DATA_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).with_context(|| format!("cannot read {}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn read_record(dir: &Path) -> Result<Option<ChecksumRecord>> {
    let path = dir.join(CHECKSUM_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("{} is corrupt", path.display()))?))
}

/// Checks every cached file of `name` against its recorded checksum.
pub fn verify_cache(name: &str, entry: &ManifestEntry, data_dir: &Path) -> Result<()> {
    let dir = data_dir.join(name);
    let record = read_record(&dir)?
        .ok_or_else(|| anyhow!("`{name}` is not cached in {}; run `wsos fetch {name}` first", dir.display()))?;
    for file in &entry.files {
        let path = dir.join(&file.name);
        let recorded = record
            .files
            .get(&file.name)
            .ok_or_else(|| anyhow!("no checksum recorded for {}; run `wsos fetch {name} --force`", path.display()))?;
        if !path.exists() {
            bail!("cached file {} is missing; run `wsos fetch {name} --force`", path.display());
        }
        let actual = sha256_file(&path)?;
        let expected = file.sha256.as_ref().unwrap_or(recorded);
        if &actual != expected || &actual != recorded {
            bail!(
                "checksum mismatch for {}: expected {expected}, found {actual}; \
                 the cache is corrupt, re-download with `wsos fetch {name} --force`",
                path.display()
            );
        }
    }
    Ok(())
}

fn download(url: &str, dest: &mut dyn Write) -> Result<()> {
    if let Some(path) = url.strip_prefix("file://") {
        let mut src = File::open(path).with_context(|| format!("cannot open {path}"))?;
        std::io::copy(&mut src, dest).with_context(|| format!("cannot copy {path}"))?;
        return Ok(());
    }
    let mut response = ureq::get(url).call().with_context(|| format!("download of {url} failed"))?;
    let mut body = response.body_mut().as_reader();
    std::io::copy(&mut body, dest).with_context(|| format!("download of {url} was interrupted"))?;
    Ok(())
}

/// Downloads `name` unless a verified copy is already cached.
pub fn fetch(name: &str, manifest: &Manifest, data_dir: &Path, force: bool) -> Result<FetchOutcome> {
    let entry = manifest.entry(name)?;
    let dir = data_dir.join(name);
    if !force && read_record(&dir)?.is_some() {
        verify_cache(name, entry, data_dir)?;
        return Ok(FetchOutcome::CacheHit);
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut record = ChecksumRecord::default();
    for file in &entry.files {
        let dest = dir.join(&file.name);
        log::info!("fetching {} -> {}", file.url, dest.display());
        let tmp = tempfile::NamedTempFile::new_in(&dir)?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file());
            download(&file.url, &mut w)?;
            w.flush()?;
        }
        let actual = sha256_file(tmp.path())?;
        if let Some(expected) = &file.sha256 {
            if !actual.eq_ignore_ascii_case(expected) {
                bail!("checksum mismatch for {}: manifest pins {expected}, download has {actual}", file.url);
            }
        }
        tmp.persist(&dest).with_context(|| format!("cannot store {}", dest.display()))?;
        record.files.insert(file.name.clone(), actual);
    }
    write_json(&dir.join(CHECKSUM_FILE), &record)?;
    Ok(FetchOutcome::Downloaded)
}
