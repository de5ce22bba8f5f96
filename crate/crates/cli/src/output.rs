//! Delimited-text tables with `#` comment headers, and run manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{input, CliResult};

/// One table cell. Floats print with 17 significant digits so values
/// round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // adding +0 maps -0 to +0
            Cell::Float(v) => format!("{:.16e}", v + 0.0),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Provenance written as comment lines at the top of every table.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: &'static str,
    pub digest: String,
    pub generator: String,
    pub seed: u64,
}

impl Provenance {
    fn comment_lines(&self) -> String {
        format!(
            "# hiersparse {} {}\n# config_digest: sha256:{}\n# generator: {}\n# seed: {}\n",
            self.command,
            env!("CARGO_PKG_VERSION"),
            self.digest,
            self.generator,
            self.seed
        )
    }
}

/// Renders a comma-separated table; text cells are quoted when needed.
pub fn render_table(prov: &Provenance, columns: &[&str], rows: &[Vec<Cell>]) -> CliResult<Vec<u8>> {
    let mut out = prov.comment_lines().into_bytes();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| input(format!("formatting output: {e}"));
    w.write_record(columns).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
    }
    out.extend(w.into_inner().map_err(|e| input(format!("formatting output: {e}")))?);
    Ok(out)
}

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn digest<T: Serialize>(value: &T) -> CliResult<String> {
    let json = serde_json::to_string(value).map_err(|e| input(format!("encoding config: {e}")))?;
    Ok(format!("{:x}", Sha256::digest(json.as_bytes())))
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Record of one invocation. Holds no timestamps or absolute paths, so a
/// rerun reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved configuration (after command-line overrides).
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_digest: Option<String>,
    pub generator: String,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub resolved_config: serde_json::Value,
}

/// `<out><suffix>`, e.g. `fit.csv` and `.trace.csv` give `fit.csv.trace.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| input(format!("writing {}: {e}", path.display())))
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<PathBuf> {
    let path = sibling(out, ".manifest.json");
    let mut json = serde_json::to_vec_pretty(manifest).map_err(|e| input(format!("encoding manifest: {e}")))?;
    json.push(b'\n');
    write(&path, &json)?;
    Ok(path)
}
