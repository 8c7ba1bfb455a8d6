use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError};

/// Smallest value the log scale resolves.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

/// Row-major field with optional validity mask.
#[derive(Debug, Clone, Copy)]
pub struct Field<'a> {
    pub rows: usize,
    pub cols: usize,
    pub values: &'a [f64],
    pub valid: Option<&'a [bool]>,
}

impl Field<'_> {
    fn is_valid(&self, k: usize) -> bool {
        self.valid.is_none_or(|v| v[k]) && self.values[k].is_finite()
    }
}

/// Maps valid cells onto 0..=255 and invalid ones to 255.
///
/// Linear: `[min, max]` of the valid cells spans the full range. Log: values
/// are clamped to `[1e-6, max]` and `log10` of the clamped range is spread
/// linearly. A field without spread maps to 0.
pub fn pixels(field: &Field, scale: Scale) -> Result<Vec<u8>, CliError> {
    if field.values.len() != field.rows * field.cols {
        return Err(CliError::Runtime(format!(
            "{} values for a {}x{} heatmap",
            field.values.len(),
            field.rows,
            field.cols
        )));
    }
    let transform = |v: f64| match scale {
        Scale::Linear => v,
        Scale::Log => v.max(LOG_FLOOR).log10(),
    };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..field.values.len() {
        if field.is_valid(k) {
            let v = transform(field.values[k]);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = hi - lo;
    Ok((0..field.values.len())
        .map(|k| {
            if !field.is_valid(k) {
                return 255;
            }
            if span.is_nan() || span <= 0.0 {
                return 0;
            }
            let t = (transform(field.values[k]) - lo) / span;
            (t * 255.0).round().clamp(0.0, 255.0) as u8
        })
        .collect())
}

/// Binary 8-bit PGM: one image row per field row.
pub fn encode_pgm(field: &Field, scale: Scale) -> Result<Vec<u8>, CliError> {
    let mut bytes = format!("P5\n{} {}\n255\n", field.cols, field.rows).into_bytes();
    bytes.extend(pixels(field, scale)?);
    Ok(bytes)
}

pub fn write_heatmap(field: &Field, path: &Path, scale: Scale) -> Result<(), CliError> {
    let bytes = encode_pgm(field, scale)?;
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}
