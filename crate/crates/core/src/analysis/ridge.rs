use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coin::wrap_to_pi;
use crate::error::{Error, Result};
use crate::sweep::SweepDataset;

/// Columns whose best probability falls below this fraction of the global
/// maximum are left out of the ridge.
pub const DEFAULT_COLUMN_FLOOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub phi: f64,
    pub zeta: f64,
    pub p: f64,
}

/// Per-`phi` column, the `zeta` of highest probability (ties go to the
/// smaller `zeta`). Columns peaking below `column_floor * global max` are
/// skipped.
pub fn extract_ridge_field(
    phis: &[f64],
    zetas: &[f64],
    p: &[f64],
    column_floor: f64,
) -> Result<Vec<RidgePoint>> {
    if p.len() != phis.len() * zetas.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a {}x{} grid",
            p.len(),
            phis.len(),
            zetas.len()
        )));
    }
    let global = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = column_floor * global;
    let ridge: Vec<RidgePoint> = phis
        .iter()
        .zip(p.chunks_exact(zetas.len()))
        .filter_map(|(&phi, column)| {
            let (zeta, best) = column.iter().zip(zetas).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(bz, bp), (&p, &z)| {
                    if p > bp || (p == bp && z < bz) {
                        (z, p)
                    } else {
                        (bz, bp)
                    }
                },
            );
            (best >= floor).then_some(RidgePoint { phi, zeta, p: best })
        })
        .collect();
    if ridge.is_empty() {
        return Err(Error::EmptyRidge);
    }
    Ok(ridge)
}

pub fn extract_ridge(dataset: &SweepDataset, column_floor: f64) -> Result<Vec<RidgePoint>> {
    let (phis, zetas, p) = dataset.grid_field()?;
    // ties are broken on the stored angle, which lies in [0, 2 pi)
    let zetas: Vec<f64> = zetas
        .iter()
        .map(|&z| crate::coin::reduce_angle(z))
        .collect();
    extract_ridge_field(&phis, &zetas, &p, column_floor)
}

/// Least-squares `alpha` for `zeta = -2 phi + 3 pi + alpha sin(2 phi)` with
/// residuals taken modulo 2 pi in `(-pi, pi]`.
pub fn fit_alpha(ridge: &[RidgePoint]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut usable = 0;
    for pt in ridge {
        let s = (2.0 * pt.phi).sin();
        if s.abs() <= 1e-6 {
            continue;
        }
        let r = wrap_to_pi(pt.zeta - (-2.0 * pt.phi + 3.0 * PI));
        num += r * s;
        den += s * s;
        usable += 1;
    }
    if usable < 3 {
        return Err(Error::Underdetermined { usable, needed: 3 });
    }
    Ok(num / den)
}
