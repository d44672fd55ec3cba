//! Table files and run manifests.
//!
//! CSV files start with one `#` line carrying the schema version and config
//! hash, followed by the column header. JSON files hold the same table with
//! NaN written as `null`. Floats use Rust's shortest round-trip formatting,
//! so identical inputs give identical bytes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "NaN".into(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // serde_json maps non-finite floats to null.
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// A named table with fixed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat, config_hash: &str) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = format!("# schema_version={SCHEMA_VERSION} config_hash={config_hash} table={}\n", self.name);
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "config_hash": config_hash,
                    "table": self.name,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Calibration applied to the dipole model of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRecord {
    pub peak_chi: f64,
    /// Calibrated `mu0` as `[re, im]`.
    pub mu0: [f64; 2],
    pub mu_b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    pub command: String,
    pub solver: String,
    pub config_hash: String,
    /// Effective configuration as TOML; feeding it back via `--config`
    /// reproduces the data files.
    pub config: String,
    pub calibration: Option<CalibrationRecord>,
    pub files: Vec<String>,
}

/// Writes tables into one directory and keeps the file list for the manifest.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    format: OutputFormat,
    config_hash: String,
    files: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl OutputWriter {
    pub fn new(dir: &Path, format: OutputFormat, config_hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), format, config_hash: config_hash.into(), files: Vec::new() })
    }

    pub fn write(&mut self, table: &Table) -> Result<PathBuf> {
        let name = format!("{}.{}", table.name, self.format.extension());
        let path = self.dir.join(&name);
        std::fs::write(&path, table.render(self.format, &self.config_hash)).map_err(|e| Error::io(&path, e))?;
        self.files.push(name);
        Ok(path)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `manifest.json` after checking every listed file exists.
    pub fn finish(
        self,
        command: &str,
        solver: &str,
        config_toml: &str,
        calibration: Option<CalibrationRecord>,
    ) -> Result<RunManifest> {
        for f in &self.files {
            let p = self.dir.join(f);
            if !p.is_file() {
                return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "output file missing")));
            }
        }
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: timestamp(),
            command: command.into(),
            solver: solver.into(),
            config_hash: self.config_hash.clone(),
            config: config_toml.into(),
            calibration,
            files: self.files.clone(),
        };
        let path = self.dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
