//! Reproducible output emission: config hashing, JSON report envelopes and
//! CSV writing. A fixed config and seed must produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// SHA-256 of the canonical JSON serialization of a config.
///
/// `serde_json` maps have sorted keys (BTreeMap-backed), so the hash does
/// not depend on construction order.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let value = serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?;
    let canonical = serde_json::to_string(&value).map_err(|e| Error::Config(e.to_string()))?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

/// The envelope every JSON artifact is wrapped in.
#[derive(Clone, Debug, Serialize)]
pub struct OutputReport<T: Serialize> {
    pub config_hash: String,
    pub version: String,
    pub results: T,
    pub violations: Vec<String>,
}

impl<T: Serialize> OutputReport<T> {
    pub fn new<C: Serialize>(config: &C, results: T, violations: Vec<String>) -> Result<Self> {
        Ok(Self {
            config_hash: config_hash(config)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            results,
            violations,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let body = self.to_json_string()?;
        write_text(path, &(body + "\n"))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

/// Writes a CSV with the declared header; floats format as shortest
/// round-trip decimals via `Display`.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<usize>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut n = 0;
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        w.write_record(&cells).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        n += 1;
    }
    w.flush().map_err(io_err(path))?;
    Ok(n)
}

/// Shortest round-trip decimal for a float column.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
