//! Monte Carlo and grid evaluation of the success probability over the
//! `(phi, zeta)` plane.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::reduce_angle;
use crate::error::{invalid, Error, Result};
use crate::io::{self, csv_number, io_error};
use crate::walk::{iteration_count, Engine, RunConfig};

/// `steps` evenly spaced angles `i * 2 pi / steps` for `i = 1..=steps`.
/// `pi` is on the grid whenever `steps` is even.
pub fn angle_grid(steps: usize) -> Vec<f64> {
    (1..=steps).map(|i| i as f64 * TAU / steps as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub phi: f64,
    pub zeta: f64,
    pub m: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    Random { seed: u64, samples: usize },
    Grid { phi_steps: usize, zeta_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    #[serde(flatten)]
    pub mode: SweepMode,
    pub m: usize,
    pub iterations: usize,
    pub engine: Engine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    pub records: Vec<SweepRecord>,
    pub meta: SweepMeta,
}

/// Evaluation settings shared by sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub engine: Engine,
    /// Overrides the standard iteration count when set.
    pub iterations: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Symmetric,
            iterations: None,
        }
    }
}

impl SweepOptions {
    fn iterations_for(&self, m: usize) -> usize {
        self.iterations.unwrap_or_else(|| iteration_count(m))
    }

    fn evaluate(&self, m: usize, phi: f64, zeta: f64) -> Result<SweepRecord> {
        let config = RunConfig::new(m, phi, zeta).with_iterations(self.iterations_for(m));
        let p = self.engine.probability(&config)?;
        Ok(SweepRecord {
            phi: reduce_angle(phi),
            zeta: reduce_angle(zeta),
            m,
            p,
        })
    }
}

/// The angles of sample `index` in the random stream keyed by `seed`.
///
/// Each index owns its own ChaCha stream, so a record never depends on how
/// many others were drawn before it or in which order.
pub fn random_angles(seed: u64, index: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let phi = rng.gen_range(0.0..TAU);
    let zeta = rng.gen_range(0.0..TAU);
    (phi, zeta)
}

pub fn sweep_random(m: usize, samples: usize, seed: u64) -> Result<SweepDataset> {
    sweep_random_with(m, samples, seed, SweepOptions::default())
}

pub fn sweep_random_with(
    m: usize,
    samples: usize,
    seed: u64,
    options: SweepOptions,
) -> Result<SweepDataset> {
    if samples == 0 {
        return Err(invalid("samples", "at least one sample is required"));
    }
    let records = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let (phi, zeta) = random_angles(seed, i);
            options.evaluate(m, phi, zeta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepDataset {
        records,
        meta: SweepMeta {
            mode: SweepMode::Random { seed, samples },
            m,
            iterations: options.iterations_for(m),
            engine: options.engine,
        },
    })
}

pub fn sweep_grid(m: usize, phi_steps: usize, zeta_steps: usize) -> Result<SweepDataset> {
    sweep_grid_with(m, phi_steps, zeta_steps, SweepOptions::default())
}

pub fn sweep_grid_with(
    m: usize,
    phi_steps: usize,
    zeta_steps: usize,
    options: SweepOptions,
) -> Result<SweepDataset> {
    if phi_steps < 2 || zeta_steps < 2 {
        return Err(invalid("steps", "grid needs at least 2 steps per axis"));
    }
    let phis = angle_grid(phi_steps);
    let zetas = angle_grid(zeta_steps);
    let records = (0..phi_steps * zeta_steps)
        .into_par_iter()
        .map(|k| options.evaluate(m, phis[k / zeta_steps], zetas[k % zeta_steps]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepDataset {
        records,
        meta: SweepMeta {
            mode: SweepMode::Grid {
                phi_steps,
                zeta_steps,
            },
            m,
            iterations: options.iterations_for(m),
            engine: options.engine,
        },
    })
}

impl SweepDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_record(&self) -> Option<&SweepRecord> {
        self.records.iter().max_by(|a, b| a.p.total_cmp(&b.p))
    }

    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        match self.meta.mode {
            SweepMode::Grid {
                phi_steps,
                zeta_steps,
            } => Some((phi_steps, zeta_steps)),
            SweepMode::Random { .. } => None,
        }
    }

    /// Grid datasets as `(phis, zetas, p)` with `p` row-major over `(phi, zeta)`.
    /// The axes are the unreduced grid angles in `(0, 2 pi]`.
    pub fn grid_field(&self) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (phi_steps, zeta_steps) = self.grid_dims().ok_or(Error::NotGrid)?;
        if self.records.len() != phi_steps * zeta_steps {
            return Err(Error::GridMismatch(format!(
                "{} records for a {phi_steps}x{zeta_steps} grid",
                self.records.len()
            )));
        }
        Ok((
            angle_grid(phi_steps),
            angle_grid(zeta_steps),
            self.records.iter().map(|r| r.p).collect(),
        ))
    }

    /// Writes `phi,zeta,m,p` rows and the metadata sidecar next to `path`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
        wtr.write_record(["phi", "zeta", "m", "p"])
            .map_err(|e| io_error(path, e))?;
        for r in &self.records {
            wtr.write_record([
                csv_number(r.phi),
                csv_number(r.zeta),
                r.m.to_string(),
                csv_number(r.p),
            ])
            .map_err(|e| io_error(path, e))?;
        }
        wtr.flush().map_err(|e| io_error(path, e))?;
        io::write_json(&io::sidecar_path(path), &self.meta)
    }

    /// Reads a dataset written by [`SweepDataset::write_csv`], sidecar included.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let meta: SweepMeta = io::read_json(&io::sidecar_path(path))?;
        let records = read_records(path)?;
        Ok(Self { records, meta })
    }
}

/// Reads bare `phi,zeta,m,p` records.
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let headers = rdr.headers().map_err(|e| io_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["phi", "zeta", "m", "p"] {
        return Err(io_error(path, "expected header phi,zeta,m,p"));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| io_error(path, e))?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|e| io_error(path, format!("column {i}: {e}")))
        };
        records.push(SweepRecord {
            phi: num(0)?,
            zeta: num(1)?,
            m: row[2]
                .parse()
                .map_err(|e| io_error(path, format!("column 2: {e}")))?,
            p: num(3)?,
        });
    }
    Ok(records)
}
