//! Text formats shared by datasets and analysis outputs.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Formats `x` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // exponent after rounding to the requested precision
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if exp < -5 || exp >= digits as i32 {
        let (mantissa, _) = sci.split_at(sci.find('e').unwrap());
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Significant digits used for every numeric CSV cell.
pub const CSV_DIGITS: usize = 12;

pub fn csv_number(x: f64) -> String {
    format_sig(x, CSV_DIGITS)
}

/// Companion metadata path: `dir/name.csv` -> `dir/name.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub(crate) fn io_error(path: &Path, err: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}: {err}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_error(path, e))
}

/// Writes a field as a CSV matrix: the first row holds the column axis
/// (preceded by an empty corner cell), each following row starts with its
/// row-axis value. Invalid cells are written as `nan`.
pub fn write_matrix_csv(
    path: &Path,
    rows: &[f64],
    cols: &[f64],
    values: &[f64],
    valid: Option<&[bool]>,
) -> Result<()> {
    if values.len() != rows.len() * cols.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a {}x{} matrix",
            values.len(),
            rows.len(),
            cols.len()
        )));
    }
    let mut wtr = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    let header: Vec<String> = std::iter::once(String::new())
        .chain(cols.iter().map(|&c| csv_number(c)))
        .collect();
    wtr.write_record(&header).map_err(|e| io_error(path, e))?;
    for (i, &r) in rows.iter().enumerate() {
        let mut record = Vec::with_capacity(cols.len() + 1);
        record.push(csv_number(r));
        for j in 0..cols.len() {
            let k = i * cols.len() + j;
            let ok = valid.is_none_or(|v| v[k]);
            record.push(if ok {
                csv_number(values[k])
            } else {
                "nan".to_string()
            });
        }
        wtr.write_record(&record).map_err(|e| io_error(path, e))?;
    }
    wtr.flush().map_err(|e| io_error(path, e))
}
