use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::CurveRelation;
use crate::error::{invalid, Result};
use crate::sweep::angle_grid;
use crate::walk::Engine;

/// Success probability along a curve `zeta(phi)` sampled on the angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveProfile {
    pub m: usize,
    pub relation: CurveRelation,
    pub phis: Vec<f64>,
    pub ps: Vec<f64>,
    pub p_max: f64,
    pub phi_max: f64,
}

impl CurveProfile {
    /// Builds a profile from precomputed samples; `phis` must be increasing.
    pub fn from_samples(
        m: usize,
        relation: CurveRelation,
        phis: Vec<f64>,
        ps: Vec<f64>,
    ) -> Result<Self> {
        if phis.len() != ps.len() || phis.is_empty() {
            return Err(invalid(
                "profile",
                "phis and ps must be non-empty and equal length",
            ));
        }
        let imax = argmax_first(&ps);
        Ok(Self {
            m,
            relation,
            p_max: ps[imax],
            phi_max: phis[imax],
            phis,
            ps,
        })
    }

    pub fn argmax(&self) -> usize {
        argmax_first(&self.ps)
    }

    /// Grid points attaining the maximum value up to `tol`.
    pub fn maxima(&self, tol: f64) -> Vec<f64> {
        self.phis
            .iter()
            .zip(&self.ps)
            .filter(|(_, &p)| p >= self.p_max - tol)
            .map(|(&phi, _)| phi)
            .collect()
    }
}

fn argmax_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn curve_profile(m: usize, relation: CurveRelation, phi_steps: usize) -> Result<CurveProfile> {
    curve_profile_with(m, relation, phi_steps, Engine::default())
}

pub fn curve_profile_with(
    m: usize,
    relation: CurveRelation,
    phi_steps: usize,
    engine: Engine,
) -> Result<CurveProfile> {
    if phi_steps < 2 {
        return Err(invalid("phi_steps", "need at least 2 grid points"));
    }
    let phis = angle_grid(phi_steps);
    let ps = phis
        .par_iter()
        .map(|&phi| engine.success(m, phi, relation.zeta_of_phi(phi)))
        .collect::<Result<Vec<_>>>()?;
    CurveProfile::from_samples(m, relation, phis, ps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum WidthMode {
    /// Threshold is this fraction of the profile maximum.
    Fraction(f64),
    /// Threshold is this probability.
    Absolute(f64),
}

impl WidthMode {
    pub fn name(&self) -> &'static str {
        match self {
            WidthMode::Fraction(_) => "fraction",
            WidthMode::Absolute(_) => "absolute",
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            WidthMode::Fraction(v) | WidthMode::Absolute(v) => *v,
        }
    }
}

/// Half-width of the plateau around `phi_max` where the profile stays at or
/// above a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthResult {
    pub eps_minus: f64,
    pub eps_plus: f64,
    pub eps: f64,
    pub threshold: f64,
    pub mode: WidthMode,
    /// Set when an absolute threshold lies above the profile maximum.
    pub unreached: bool,
}

/// Walks outward from the maximum to the first grid points below the
/// threshold and places each boundary by linear interpolation between the
/// last passing and first failing point. A side that never fails stops at
/// the end of the grid.
pub fn width(profile: &CurveProfile, mode: WidthMode) -> Result<WidthResult> {
    let threshold = match mode {
        WidthMode::Fraction(v) => {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid("fraction", format!("{v} is not in (0, 1]")));
            }
            v * profile.p_max
        }
        WidthMode::Absolute(v) => {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid("absolute", format!("{v} is not in (0, 1)")));
            }
            v
        }
    };
    if threshold > profile.p_max {
        return Ok(WidthResult {
            eps_minus: 0.0,
            eps_plus: 0.0,
            eps: 0.0,
            threshold,
            mode,
            unreached: true,
        });
    }

    let phis = &profile.phis;
    let ps = &profile.ps;
    let imax = profile.argmax();
    let crossing = |pass: usize, fail: usize| -> f64 {
        let t = (ps[pass] - threshold) / (ps[pass] - ps[fail]);
        phis[pass] + t * (phis[fail] - phis[pass])
    };

    let mut hi = imax;
    while hi + 1 < ps.len() && ps[hi + 1] >= threshold {
        hi += 1;
    }
    let right = if hi + 1 < ps.len() {
        crossing(hi, hi + 1)
    } else {
        phis[hi]
    };

    let mut lo = imax;
    while lo > 0 && ps[lo - 1] >= threshold {
        lo -= 1;
    }
    let left = if lo > 0 {
        crossing(lo, lo - 1)
    } else {
        phis[lo]
    };

    let eps_plus = right - profile.phi_max;
    let eps_minus = profile.phi_max - left;
    Ok(WidthResult {
        eps_minus,
        eps_plus,
        eps: 0.5 * (eps_minus + eps_plus),
        threshold,
        mode,
        unreached: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tent() -> CurveProfile {
        // peak 1.0 at phi = 5, linear slopes of 0.1 per unit
        let phis: Vec<f64> = (0..=10).map(f64::from).collect();
        let ps = phis
            .iter()
            .map(|&x| 1.0 - 0.1 * (x - 5.0f64).abs())
            .collect();
        CurveProfile::from_samples(4, CurveRelation::Linear, phis, ps).unwrap()
    }

    #[test]
    fn interpolated_boundaries() {
        let w = width(&tent(), WidthMode::Fraction(0.75)).unwrap();
        assert_abs_diff_eq!(w.eps_plus, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.eps_minus, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.eps, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.threshold, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn fraction_one_is_degenerate() {
        let w = width(&tent(), WidthMode::Fraction(1.0)).unwrap();
        assert!(w.eps >= 0.0 && w.eps <= 1.0);
        assert_eq!(w.eps, 0.0);
    }

    #[test]
    fn absolute_above_max_is_unreached() {
        let w = width(&tent(), WidthMode::Absolute(0.99)).unwrap();
        assert!(!w.unreached);
        let mut p = tent();
        p.ps.iter_mut().for_each(|x| *x *= 0.5);
        p.p_max = 0.5;
        let w = width(&p, WidthMode::Absolute(0.6)).unwrap();
        assert!(w.unreached);
        assert_eq!(w.eps, 0.0);
    }

    #[test]
    fn side_without_crossing_stops_at_grid_end() {
        let w = width(&tent(), WidthMode::Fraction(0.4)).unwrap();
        assert_abs_diff_eq!(w.eps_plus, 5.0);
        assert_abs_diff_eq!(w.eps_minus, 5.0);
    }

    #[test]
    fn rejects_bad_thresholds() {
        assert!(width(&tent(), WidthMode::Fraction(0.0)).is_err());
        assert!(width(&tent(), WidthMode::Fraction(1.1)).is_err());
        assert!(width(&tent(), WidthMode::Absolute(1.0)).is_err());
    }

    #[test]
    fn first_of_ties_is_max() {
        let p = CurveProfile::from_samples(
            4,
            CurveRelation::Constant,
            vec![1.0, 2.0, 3.0],
            vec![0.2, 0.5, 0.5],
        )
        .unwrap();
        assert_eq!(p.phi_max, 2.0);
        assert_eq!(p.maxima(0.0), vec![2.0, 3.0]);
    }
}
