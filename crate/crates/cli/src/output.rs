use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Number formatting shared by every CSV: shortest round-trip digits,
/// scientific notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Output directory plus the list of files written into it.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes a CSV with the given header and rows.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckItem {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub master_seed: u64,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub summary: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckItem>,
}

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Appends one JSON line to the manifest of `dir`.
pub fn append_manifest(dir: &Path, manifest: &RunManifest) -> CliResult<()> {
    let line = serde_json::to_string(manifest)?;
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join(MANIFEST_FILE))?;
    writeln!(f, "{line}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(1e-6), "1e-6");
        assert_eq!(num(457.14285714285717), "457.14285714285717");
        assert_eq!(num(-3.5e-9), "-3.5e-9");
        assert_eq!(num(1e-6).parse::<f64>().unwrap(), 1e-6);
    }
}
