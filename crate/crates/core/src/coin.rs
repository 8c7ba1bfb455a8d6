//! The traversing coin: one generalized Householder reflection about the
//! uniform coin vector followed by a global phase, plus the curves that tie
//! the phase `zeta` to the reflection phase `phi`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The sinusoidal-curve amplitude used as a size-independent benchmark, -1/(2 pi).
pub const BENCHMARK_ALPHA: f64 = -1.0 / TAU;

/// Reduces an angle into `[0, 2 pi)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of `x` modulo 2 pi in `(-pi, pi]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    let r = reduce_angle(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CoinMatrix {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("coin", "matrix must be square and non-empty"));
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                for c in 0..n {
                    data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        Self { dim: n, data }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `max |(C^dagger C - I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let expected = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((prod.data[r * n + c] - expected).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }
}

impl fmt::Display for CoinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Parameters of the Householder-plus-phase coin. Angles are kept in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinSpec {
    m: usize,
    phi: f64,
    zeta: f64,
}

impl CoinSpec {
    pub fn new(m: usize, phi: f64, zeta: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::CoinDimension { got: m, min: 2 });
        }
        if !phi.is_finite() || !zeta.is_finite() {
            return Err(invalid("phi/zeta", "angles must be finite"));
        }
        Ok(Self {
            m,
            phi: reduce_angle(phi),
            zeta: reduce_angle(zeta),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Structured form of the coin, applied in O(m) per node.
    pub fn operator(&self) -> HouseholderCoin {
        HouseholderCoin::new(self)
    }
}

/// `e^{i zeta} (I - (1 - e^{i phi}) |chi><chi|)` with `|chi>` the uniform vector.
pub fn build_coin(spec: &CoinSpec) -> CoinMatrix {
    let m = spec.m;
    let phase = Complex64::from_polar(1.0, spec.zeta);
    let reflect = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, spec.phi)) / m as f64;
    let mut data = Vec::with_capacity(m * m);
    for r in 0..m {
        for c in 0..m {
            let delta = if r == c { 1.0 } else { 0.0 };
            data.push(phase * (Complex64::new(delta, 0.0) - reflect));
        }
    }
    CoinMatrix { dim: m, data }
}

/// A unitary acting on the `m` coin amplitudes of a single node.
pub trait CoinOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_block(&self, block: &mut [Complex64]);
}

impl CoinOperator for CoinMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_block(&self, block: &mut [Complex64]) {
        let out = self.mul_vec(block);
        block.copy_from_slice(&out);
    }
}

/// The Householder-plus-phase coin in structured form:
/// `C v = e^{i zeta} (v - (1 - e^{i phi}) mean(v) 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HouseholderCoin {
    m: usize,
    phase: Complex64,
    // (1 - e^{i phi}) / m
    reflect: Complex64,
}

impl HouseholderCoin {
    pub fn new(spec: &CoinSpec) -> Self {
        Self {
            m: spec.m,
            phase: Complex64::from_polar(1.0, spec.zeta),
            reflect: (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, spec.phi))
                / spec.m as f64,
        }
    }

    pub(crate) fn phase(&self) -> Complex64 {
        self.phase
    }

    pub(crate) fn reflect(&self) -> Complex64 {
        self.reflect
    }
}

impl CoinOperator for HouseholderCoin {
    fn dim(&self) -> usize {
        self.m
    }

    fn apply_block(&self, block: &mut [Complex64]) {
        let sum: Complex64 = block.iter().sum();
        let shift = self.reflect * sum;
        for a in block.iter_mut() {
            *a = self.phase * (*a - shift);
        }
    }
}

/// A relation `zeta(phi)` restricting the coin to a curve in the angle plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveRelation {
    /// `zeta = -2 phi + 3 pi`
    Linear,
    /// `zeta = pi`
    Constant,
    /// `zeta = -2 phi + 3 pi + alpha sin(2 phi)`
    Sinusoidal { alpha: f64 },
}

impl CurveRelation {
    pub fn zeta_of_phi(&self, phi: f64) -> f64 {
        zeta_of_phi(*self, phi)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurveRelation::Linear => "linear",
            CurveRelation::Constant => "constant",
            CurveRelation::Sinusoidal { .. } => "sinusoidal",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            CurveRelation::Sinusoidal { alpha } => Some(*alpha),
            _ => None,
        }
    }
}

impl fmt::Display for CurveRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveRelation::Sinusoidal { alpha } => write!(f, "sinusoidal(alpha={alpha})"),
            other => f.write_str(other.name()),
        }
    }
}

fn linear_line(phi: f64) -> f64 {
    -2.0 * phi + 3.0 * PI
}

pub fn zeta_of_phi(relation: CurveRelation, phi: f64) -> f64 {
    match relation {
        CurveRelation::Linear => reduce_angle(linear_line(phi)),
        CurveRelation::Constant => PI,
        CurveRelation::Sinusoidal { alpha } => {
            reduce_angle(linear_line(phi) + alpha * (2.0 * phi).sin())
        }
    }
}

/// Solves the sinusoidal relation for `alpha` through the point `(phi, zeta)`.
///
/// The 2 pi ambiguity in `zeta` is resolved by taking the offset from the
/// linear line in `(-pi, pi]`.
pub fn alpha_from_point(phi: f64, zeta: f64) -> Result<f64> {
    let s = (2.0 * phi).sin();
    if s.abs() < 1e-9 {
        return Err(Error::IndeterminateAlpha { phi });
    }
    Ok(wrap_to_pi(zeta - linear_line(phi)) / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_matrix_close(a: &CoinMatrix, b: &CoinMatrix, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).norm() < tol, "{x} vs {y}\n{a}\n{b}");
        }
    }

    #[test]
    fn grover_coin_for_two_directions_is_swap() {
        let coin = build_coin(&CoinSpec::new(2, PI, PI).unwrap());
        let swap = CoinMatrix::from_rows(vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).unwrap();
        assert_matrix_close(&coin, &swap, 1e-12);
    }

    #[test]
    fn zero_angles_give_identity() {
        for m in 2..8 {
            let coin = build_coin(&CoinSpec::new(m, 0.0, 0.0).unwrap());
            assert_matrix_close(&coin, &CoinMatrix::identity(m), 1e-15);
        }
    }

    #[test]
    fn grover_coin_three_directions() {
        let coin = build_coin(&CoinSpec::new(3, PI, PI).unwrap());
        for r in 0..3 {
            for col in 0..3 {
                let expected = if r == col { -1.0 / 3.0 } else { 2.0 / 3.0 };
                assert!((coin.get(r, col) - c(expected)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_small_dimension() {
        assert_eq!(
            CoinSpec::new(1, 0.0, 0.0),
            Err(Error::CoinDimension { got: 1, min: 2 })
        );
    }

    #[test]
    fn angles_are_reduced() {
        let spec = CoinSpec::new(3, 3.0 * PI, -PI / 2.0).unwrap();
        assert_abs_diff_eq!(spec.phi(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.zeta(), 1.5 * PI, epsilon = 1e-12);
        assert_eq!(reduce_angle(-1e-300), 0.0);
        assert_eq!(reduce_angle(TAU), 0.0);
    }

    #[test]
    fn structured_operator_matches_dense() {
        let spec = CoinSpec::new(5, 1.3, 4.1).unwrap();
        let dense = build_coin(&spec);
        let op = spec.operator();
        let v: Vec<Complex64> = (0..5)
            .map(|k| Complex64::new(0.1 * k as f64, -0.3 + 0.2 * k as f64))
            .collect();
        let expected = dense.mul_vec(&v);
        let mut got = v.clone();
        op.apply_block(&mut got);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenstructure() {
        let (phi, zeta) = (0.7, 2.2);
        let m = 4;
        let coin = build_coin(&CoinSpec::new(m, phi, zeta).unwrap());
        let chi = vec![c(0.5); m];
        let out = coin.mul_vec(&chi);
        let lambda = Complex64::from_polar(1.0, phi + zeta);
        for (o, x) in out.iter().zip(&chi) {
            assert!((o - lambda * x).norm() < 1e-12);
        }
        let orth = vec![
            c(1.0),
            c(-1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, -2.0),
        ];
        let out = coin.mul_vec(&orth);
        let lambda = Complex64::from_polar(1.0, zeta);
        for (o, x) in out.iter().zip(&orth) {
            assert!((o - lambda * x).norm() < 1e-12);
        }
    }

    #[test]
    fn curve_examples() {
        assert_abs_diff_eq!(zeta_of_phi(CurveRelation::Linear, PI), PI, epsilon = 1e-12);
        let z = zeta_of_phi(
            CurveRelation::Sinusoidal {
                alpha: BENCHMARK_ALPHA,
            },
            PI / 2.0,
        );
        assert!(z < 1e-12 || TAU - z < 1e-12, "zeta = {z}");
        for phi in [0.0, 1.0, 5.0] {
            assert_eq!(zeta_of_phi(CurveRelation::Constant, phi), PI);
        }
    }

    #[test]
    fn sinusoidal_zero_is_linear_exactly() {
        for k in 0..=1000 {
            let phi = TAU * k as f64 / 1000.0;
            assert_eq!(
                zeta_of_phi(CurveRelation::Sinusoidal { alpha: 0.0 }, phi),
                zeta_of_phi(CurveRelation::Linear, phi)
            );
        }
    }

    #[test]
    fn alpha_inversion() {
        let phi = PI / 4.0;
        let zeta = reduce_angle(-PI / 2.0 + 3.0 * PI + 0.5);
        assert_abs_diff_eq!(alpha_from_point(phi, zeta).unwrap(), 0.5, epsilon = 1e-12);

        for phi in [0.3, 1.0, 2.0, 4.0, 5.5] {
            let zeta = zeta_of_phi(CurveRelation::Linear, phi);
            assert_abs_diff_eq!(alpha_from_point(phi, zeta).unwrap(), 0.0, epsilon = 1e-12);
        }

        let zeta = zeta_of_phi(CurveRelation::Sinusoidal { alpha: -0.159 }, 1.0);
        assert_abs_diff_eq!(
            alpha_from_point(1.0, zeta).unwrap(),
            -0.159,
            epsilon = 1e-10
        );
    }

    #[test]
    fn alpha_indeterminate_on_zero_locus() {
        for phi in [0.0, PI / 2.0, PI, 1.5 * PI] {
            assert!(matches!(
                alpha_from_point(phi, 1.0),
                Err(Error::IndeterminateAlpha { .. })
            ));
        }
    }

    #[test]
    fn wrap_to_pi_range() {
        assert_abs_diff_eq!(wrap_to_pi(PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_to_pi(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_to_pi(3.0 * PI + 0.1), -PI + 0.1, epsilon = 1e-12);
    }
}
