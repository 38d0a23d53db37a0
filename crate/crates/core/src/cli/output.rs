//! Tabular output with fixed numeric formatting and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};

/// Nine significant digits in scientific notation; `-0` prints as `0`.
pub fn format_number(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(invalid(format!("row has {} fields, header has {}", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Comma-separated, LF line endings, trailing newline.
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses a numeric CSV with a header line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| crate::Error::Parse("empty CSV".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| crate::Error::Parse(format!("CSV line {}: {e}", k + 2)))?;
            if row.len() != header.len() {
                return Err(crate::Error::Parse(format!("CSV line {}: expected {} fields", k + 2, header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance for one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved inputs (configuration after overrides, sweep settings).
    pub inputs: serde_json::Value,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub outputs: Vec<OutputRecord>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, inputs: serde_json::Value, seed: Option<u64>) -> Result<Self> {
        let canonical = serde_json::to_vec(&inputs)?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(&canonical),
            inputs,
            seed,
            started_unix_s: unix_now(),
            finished_unix_s: 0,
            outputs: Vec::new(),
        })
    }

    /// Writes `contents` to `path` and records its digest.
    pub fn write_output(&mut self, path: &Path, contents: &[u8]) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(contents)?;
        self.outputs.push(OutputRecord {
            path: path.to_path_buf(),
            sha256: sha256_hex(contents),
            bytes: contents.len(),
        });
        Ok(())
    }

    /// Finalises timestamps and writes the manifest next to `primary`
    /// as `<primary>.manifest.json`.
    pub fn finish(mut self, primary: &Path) -> Result<PathBuf> {
        self.finished_unix_s = unix_now();
        let mut name = primary.as_os_str().to_os_string();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        std::fs::write(&path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(path)
    }
}
