//! Sensitivity of the success probability to coin-parameter errors over the
//! `(phi, alpha)` plane, and its comparison with the constant-`zeta` coin.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::curve_profile_with;
use crate::coin::CurveRelation;
use crate::error::{invalid, Error, Result};
use crate::sweep::angle_grid;
use crate::walk::Engine;

/// Probabilities below this are treated as zero and their cells flagged.
pub const P_FLOOR: f64 = 1e-12;

/// Success probability on the sinusoidal curve with amplitude `alpha`.
pub fn p_of_phi_alpha(m: usize, phi: f64, alpha: f64) -> Result<f64> {
    p_of_phi_alpha_with(m, phi, alpha, Engine::default())
}

pub fn p_of_phi_alpha_with(m: usize, phi: f64, alpha: f64, engine: Engine) -> Result<f64> {
    engine.success(m, phi, CurveRelation::Sinusoidal { alpha }.zeta_of_phi(phi))
}

/// Grid layout for `(phi, alpha)` fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub phi_steps: usize,
    pub alpha_steps: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl Default for PlaneGrid {
    fn default() -> Self {
        Self {
            phi_steps: 180,
            alpha_steps: 250,
            alpha_min: -1.5,
            alpha_max: 1.0,
        }
    }
}

impl PlaneGrid {
    pub fn phis(&self) -> Vec<f64> {
        angle_grid(self.phi_steps)
    }

    /// `alpha_min + j * (alpha_max - alpha_min) / alpha_steps` for `j = 1..=alpha_steps`.
    pub fn alphas(&self) -> Vec<f64> {
        let step = (self.alpha_max - self.alpha_min) / self.alpha_steps as f64;
        (1..=self.alpha_steps)
            .map(|j| self.alpha_min + j as f64 * step)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.phi_steps < 3 || self.alpha_steps < 3 {
            return Err(invalid("grid", "need at least 3 points per axis"));
        }
        if self.alpha_max.is_nan() || self.alpha_min.is_nan() || self.alpha_max <= self.alpha_min {
            return Err(invalid("grid", "alpha range is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Probability,
    SigmaP,
    Ratio,
}

/// A field over the `(phi, alpha)` plane, row-major with `phi` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessGrid {
    pub m: usize,
    pub kind: FieldKind,
    pub phis: Vec<f64>,
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// Grid node the distance weights are measured from (`SigmaP`, `Ratio`).
    pub alpha_center: Option<f64>,
}

impl RobustnessGrid {
    pub fn rows(&self) -> usize {
        self.phis.len()
    }

    pub fn cols(&self) -> usize {
        self.alphas.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.alphas.len() + j
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.index(i, j);
        self.valid[k].then_some(self.values[k])
    }

    /// Index of the `phi = pi` row, if it is on the grid.
    pub fn center_row(&self) -> Option<usize> {
        self.phis.iter().position(|&phi| phi == PI)
    }

    pub fn center_col(&self) -> Option<usize> {
        let c = self.alpha_center?;
        self.alphas.iter().position(|&a| a == c)
    }
}

pub fn probability_grid(m: usize, grid: &PlaneGrid, engine: Engine) -> Result<RobustnessGrid> {
    grid.validate()?;
    let phis = grid.phis();
    let alphas = grid.alphas();
    let cols = alphas.len();
    let values = (0..phis.len() * cols)
        .into_par_iter()
        .map(|k| p_of_phi_alpha_with(m, phis[k / cols], alphas[k % cols], engine))
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessGrid {
        m,
        kind: FieldKind::Probability,
        valid: vec![true; values.len()],
        phis,
        alphas,
        values,
        alpha_center: None,
    })
}

/// Grid node nearest to `alpha` (first of ties).
pub fn snap_to_grid(alphas: &[f64], alpha: f64) -> f64 {
    alphas
        .iter()
        .copied()
        .min_by(|a, b| (a - alpha).abs().total_cmp(&(b - alpha).abs()))
        .expect("non-empty grid")
}

/// Central difference along one axis, one-sided at the ends.
fn derivative(values: &[f64], axis: &[f64], at: usize, stride: usize, offset: usize) -> f64 {
    let n = axis.len();
    let (lo, hi) = if at == 0 {
        (0, 1)
    } else if at + 1 == n {
        (n - 2, n - 1)
    } else {
        (at - 1, at + 1)
    };
    (values[offset + hi * stride] - values[offset + lo * stride]) / (axis[hi] - axis[lo])
}

/// Distance-weighted relative deviation of `p`:
///
/// `sigma_p = (1/p) sqrt((dp/dphi)^2 s_phi^2 (phi - pi)^2 + (dp/dalpha)^2 s_alpha^2 (alpha - alpha_c)^2)`
///
/// with `alpha_c` the alpha-grid node nearest `alpha_center`, so the cell at
/// `(pi, alpha_c)` is exactly zero.
pub fn sigma_p_from_probability(
    probability: &RobustnessGrid,
    alpha_center: f64,
    sigma_phi: f64,
    sigma_alpha: f64,
) -> Result<RobustnessGrid> {
    if probability.kind != FieldKind::Probability {
        return Err(Error::GridMismatch("expected a probability field".into()));
    }
    let center = snap_to_grid(&probability.alphas, alpha_center);
    let (rows, cols) = (probability.rows(), probability.cols());
    let p = &probability.values;
    let mut values = vec![0.0; rows * cols];
    let mut valid = vec![true; rows * cols];
    for i in 0..rows {
        let dphi_weight = sigma_phi * (probability.phis[i] - PI);
        for j in 0..cols {
            let k = i * cols + j;
            if p[k] < P_FLOOR {
                valid[k] = false;
                values[k] = f64::NAN;
                continue;
            }
            let dp_dphi = derivative(p, &probability.phis, i, cols, j);
            let dp_dalpha = derivative(p, &probability.alphas, j, 1, i * cols);
            let dalpha_weight = sigma_alpha * (probability.alphas[j] - center);
            let a = dp_dphi * dphi_weight;
            let b = dp_dalpha * dalpha_weight;
            values[k] = (a * a + b * b).sqrt() / p[k];
        }
    }
    Ok(RobustnessGrid {
        m: probability.m,
        kind: FieldKind::SigmaP,
        phis: probability.phis.clone(),
        alphas: probability.alphas.clone(),
        values,
        valid,
        alpha_center: Some(center),
    })
}

pub fn sigma_p_grid(
    m: usize,
    alpha_center: f64,
    sigma_phi: f64,
    sigma_alpha: f64,
) -> Result<RobustnessGrid> {
    let p = probability_grid(m, &PlaneGrid::default(), Engine::default())?;
    sigma_p_from_probability(&p, alpha_center, sigma_phi, sigma_alpha)
}

/// The constant-`zeta` analogue of `sigma_p` along the `phi` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaPrime {
    pub m: usize,
    pub phis: Vec<f64>,
    /// Success probability on `zeta = pi`.
    pub p_prime: Vec<f64>,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

pub fn sigma_p_prime_from_profile(
    m: usize,
    phis: &[f64],
    p_prime: &[f64],
    sigma_phi: f64,
) -> SigmaPrime {
    let mut values = vec![f64::NAN; phis.len()];
    let mut valid = vec![false; phis.len()];
    for i in 0..phis.len() {
        if p_prime[i] < P_FLOOR {
            continue;
        }
        let d = derivative(p_prime, phis, i, 1, 0);
        values[i] = (d * sigma_phi * (phis[i] - PI)).abs() / p_prime[i];
        valid[i] = true;
    }
    SigmaPrime {
        m,
        phis: phis.to_vec(),
        p_prime: p_prime.to_vec(),
        values,
        valid,
    }
}

pub fn sigma_p_prime(m: usize, sigma_phi: f64) -> Result<SigmaPrime> {
    sigma_p_prime_with(
        m,
        sigma_phi,
        PlaneGrid::default().phi_steps,
        Engine::default(),
    )
}

pub fn sigma_p_prime_with(
    m: usize,
    sigma_phi: f64,
    phi_steps: usize,
    engine: Engine,
) -> Result<SigmaPrime> {
    let profile = curve_profile_with(m, CurveRelation::Constant, phi_steps, engine)?;
    Ok(sigma_p_prime_from_profile(
        m,
        &profile.phis,
        &profile.ps,
        sigma_phi,
    ))
}

impl SigmaPrime {
    /// Contiguous `phi`-index range around the peak of `p'` where
    /// `p' >= fraction * max p'`.
    pub fn central_window(&self, fraction: f64) -> (usize, usize) {
        let p = &self.p_prime;
        let mut imax = 0;
        for (i, &x) in p.iter().enumerate() {
            if x > p[imax] {
                imax = i;
            }
        }
        let floor = fraction * p[imax];
        let mut lo = imax;
        while lo > 0 && p[lo - 1] >= floor {
            lo -= 1;
        }
        let mut hi = imax;
        while hi + 1 < p.len() && p[hi + 1] >= floor {
            hi += 1;
        }
        (lo, hi)
    }
}

/// `sigma_p(i, j) / sigma_p'(i)`; cells where either side is invalid or the
/// denominator vanishes are flagged.
pub fn ratio_map(sigma: &RobustnessGrid, prime: &SigmaPrime) -> Result<RobustnessGrid> {
    if sigma.phis != prime.phis {
        return Err(Error::GridMismatch("phi grids differ".into()));
    }
    let cols = sigma.cols();
    let mut values = vec![f64::NAN; sigma.values.len()];
    let mut valid = vec![false; sigma.values.len()];
    for i in 0..sigma.rows() {
        let denom = prime.values[i];
        if !prime.valid[i] || denom == 0.0 {
            continue;
        }
        for j in 0..cols {
            let k = i * cols + j;
            if sigma.valid[k] {
                values[k] = sigma.values[k] / denom;
                valid[k] = true;
            }
        }
    }
    Ok(RobustnessGrid {
        m: sigma.m,
        kind: FieldKind::Ratio,
        phis: sigma.phis.clone(),
        alphas: sigma.alphas.clone(),
        values,
        valid,
        alpha_center: sigma.alpha_center,
    })
}

/// Summary of a 4-connected region of valid cells satisfying a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub cells: usize,
    pub row_min: usize,
    pub row_max: usize,
    pub col_min: usize,
    pub col_max: usize,
}

/// Flood fill from `(row, col)` through valid cells with `accept(value)`.
/// Returns `None` when the seed cell itself is rejected.
pub fn region_around(
    grid: &RobustnessGrid,
    row: usize,
    col: usize,
    accept: impl Fn(f64) -> bool,
) -> Option<Region> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let ok = |i: usize, j: usize| grid.get(i, j).is_some_and(&accept);
    if !ok(row, col) {
        return None;
    }
    let mut seen = vec![false; rows * cols];
    let mut queue = VecDeque::from([(row, col)]);
    seen[row * cols + col] = true;
    let mut region = Region {
        cells: 0,
        row_min: row,
        row_max: row,
        col_min: col,
        col_max: col,
    };
    while let Some((i, j)) = queue.pop_front() {
        region.cells += 1;
        region.row_min = region.row_min.min(i);
        region.row_max = region.row_max.max(i);
        region.col_min = region.col_min.min(j);
        region.col_max = region.col_max.max(j);
        let neighbours = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (a, b) in neighbours {
            if a < rows && b < cols && !seen[a * cols + b] && ok(a, b) {
                seen[a * cols + b] = true;
                queue.push_back((a, b));
            }
        }
    }
    Some(region)
}

/// Fraction of valid cells in rows `rows.0..=rows.1` whose value is below `threshold`.
pub fn fraction_below(grid: &RobustnessGrid, rows: (usize, usize), threshold: f64) -> f64 {
    let mut valid = 0usize;
    let mut below = 0usize;
    for i in rows.0..=rows.1 {
        for j in 0..grid.cols() {
            if let Some(v) = grid.get(i, j) {
                valid += 1;
                if v < threshold {
                    below += 1;
                }
            }
        }
    }
    if valid == 0 {
        0.0
    } else {
        below as f64 / valid as f64
    }
}
