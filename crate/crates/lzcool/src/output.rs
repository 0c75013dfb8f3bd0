//! Deterministic dataset emission.
//!
//! Data files (CSV or JSON) contain no timestamps, so repeated runs of the
//! same configuration on the same build produce byte-identical files; a JSON
//! metadata sidecar per dataset carries the timestamp, config hash, axis
//! definitions, and the cell-failure manifest. All writes are atomic
//! (write-temp-then-rename).

use crate::error::Error;
use crate::sweep::{truncation_rule, CellFailure};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Data file format for emitted datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Where and how datasets are written.
#[derive(Debug, Clone, Serialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// A rectangular table of f64 values with named columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// File stem, e.g. `fig3a_population_map`.
    pub name: String,
    /// Column names carrying units, e.g. `omega_ghz`.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Provenance recorded in the sidecar (and, minus the timestamp, embedded in
/// JSON data files).
#[derive(Debug, Clone)]
pub struct DatasetMeta {
    pub config_hash: String,
    pub method: String,
    /// Axis definitions of the grid behind the dataset.
    pub axes: serde_json::Value,
    pub failures: Vec<CellFailure>,
}

/// SHA-256 hex digest of a value's canonical JSON serialization.
pub fn canonical_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Shortest round-tripping decimal form; NaN cells (failed sweep cells) print
/// as `NaN`.
fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes(dataset: &Dataset) -> Result<Vec<u8>, Error> {
    let mut text = String::new();
    text.push_str(&dataset.columns.join(","));
    text.push('\n');
    for (i, row) in dataset.rows.iter().enumerate() {
        if row.len() != dataset.columns.len() {
            return Err(Error::Compute(format!(
                "dataset `{}` row {i} has {} values for {} columns",
                dataset.name,
                row.len(),
                dataset.columns.len()
            )));
        }
        let mut first = true;
        for &v in row {
            if !first {
                text.push(',');
            }
            first = false;
            text.push_str(&format_value(v));
        }
        text.push('\n');
    }
    Ok(text.into_bytes())
}

fn json_bytes(dataset: &Dataset, meta: &DatasetMeta) -> Result<Vec<u8>, Error> {
    for (i, row) in dataset.rows.iter().enumerate() {
        if row.len() != dataset.columns.len() {
            return Err(Error::Compute(format!(
                "dataset `{}` row {i} has {} values for {} columns",
                dataset.name,
                row.len(),
                dataset.columns.len()
            )));
        }
    }
    let value = json!({
        "name": dataset.name,
        "columns": dataset.columns,
        "rows": dataset.rows,
        "config_hash": meta.config_hash,
        "method": meta.method,
        "truncation_rule": truncation_rule(),
    });
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json value serializes");
    bytes.push(b'\n');
    Ok(bytes)
}

fn sidecar_bytes(dataset: &Dataset, meta: &DatasetMeta, timestamp_unix: u64) -> Vec<u8> {
    let value = json!({
        "name": dataset.name,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_hash": meta.config_hash,
        "method": meta.method,
        "truncation_rule": truncation_rule(),
        "columns": dataset.columns,
        "row_count": dataset.rows.len(),
        "axes": meta.axes,
        "failures": meta.failures,
        "timestamp_unix": timestamp_unix,
    });
    let mut bytes = serde_json::to_vec_pretty(&value).expect("json value serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes a dataset's data file and its `<name>.meta.json` sidecar, returning
/// the paths written.
pub fn write_dataset(
    out: &OutputConfig,
    dataset: &Dataset,
    meta: &DatasetMeta,
    timestamp_unix: u64,
) -> Result<Vec<PathBuf>, Error> {
    let data_path = match out.format {
        OutputFormat::Csv => out.directory.join(format!("{}.csv", dataset.name)),
        OutputFormat::Json => out.directory.join(format!("{}.json", dataset.name)),
    };
    let data = match out.format {
        OutputFormat::Csv => csv_bytes(dataset)?,
        OutputFormat::Json => json_bytes(dataset, meta)?,
    };
    write_atomic(&data_path, &data)?;
    let sidecar_path = out.directory.join(format!("{}.meta.json", dataset.name));
    write_atomic(&sidecar_path, &sidecar_bytes(dataset, meta, timestamp_unix))?;
    Ok(vec![data_path, sidecar_path])
}
