use std::path::{Path, PathBuf};

use qrws_core::io::{csv_number, sidecar_path, write_json};
use serde::Serialize;

use crate::error::{io_err, CliError};

/// Writes a numeric CSV with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    wtr.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        wtr.write_record(row.iter().map(|&v| csv_number(v)))
            .map_err(|e| io_err(path, e))?;
    }
    wtr.flush().map_err(|e| io_err(path, e))
}

pub fn write_sidecar<T: Serialize>(csv_path: &Path, meta: &T) -> Result<PathBuf, CliError> {
    let path = sidecar_path(csv_path);
    write_json(&path, meta)?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}
