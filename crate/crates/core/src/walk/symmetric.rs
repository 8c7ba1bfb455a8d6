//! Exact reduced simulation on the bit-permutation-symmetric subspace.
//!
//! Permuting the `m` node bits (and the coin directions with them) commutes
//! with the shift, with a coin that treats all directions alike, with the
//! negation at node 0, and fixes the uniform start. The walk therefore never
//! leaves the subspace where the amplitude of `(d, x)` depends only on the
//! Hamming weight `w` of `x` and on the bit `x_d`. That subspace has `2m`
//! dimensions, so one iteration costs O(m) instead of O(m 2^m).
//!
//! The marked node is node 0; by the hypercube's transitivity this gives the
//! same success probability as any other marked node.

use num_complex::Complex64;

use super::RunConfig;
use crate::coin::HouseholderCoin;
use crate::error::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-element amplitudes of the orbit classes.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    m: usize,
    // `outward[w]`: direction bit of x is 0, weight w in 0..m
    outward: Vec<Complex64>,
    // `inward[w]`: direction bit of x is 1, weight w in 1..=m (index 0 unused)
    inward: Vec<Complex64>,
}

impl SymmetricState {
    pub fn uniform(m: usize) -> Self {
        let amp = Complex64::new(1.0 / ((m << m) as f64).sqrt(), 0.0);
        let mut outward = vec![amp; m + 1];
        let mut inward = vec![amp; m + 1];
        outward[m] = ZERO;
        inward[0] = ZERO;
        Self { m, outward, inward }
    }

    /// Amplitude of `(direction, node)` in the full basis.
    pub fn amplitude(&self, direction: usize, node: usize) -> Complex64 {
        let w = node.count_ones() as usize;
        if node >> direction & 1 == 1 {
            self.inward[w]
        } else {
            self.outward[w]
        }
    }

    /// Norm of the corresponding full state vector.
    pub fn norm(&self) -> f64 {
        let m = self.m;
        let mut binom = 1.0f64;
        let mut total = 0.0;
        for w in 0..=m {
            total += binom
                * ((m - w) as f64 * self.outward[w].norm_sqr()
                    + w as f64 * self.inward[w].norm_sqr());
            binom = binom * (m - w) as f64 / (w + 1) as f64;
        }
        total.sqrt()
    }

    pub fn marked_probability(&self) -> f64 {
        self.m as f64 * self.outward[0].norm_sqr()
    }

    pub(crate) fn step(&mut self, coin: &HouseholderCoin) {
        let m = self.m;
        let phase = coin.phase();
        let reflect = coin.reflect();
        let marked = -self.outward[0];
        for w in 1..=m {
            let sum = self.inward[w] * w as f64 + self.outward[w] * (m - w) as f64;
            let shift = reflect * sum;
            self.inward[w] = phase * (self.inward[w] - shift);
            self.outward[w] = phase * (self.outward[w] - shift);
        }
        self.outward[0] = marked;
        // shift: inward moves to weight w-1 with bit cleared, outward to w+1 with bit set
        let inward: Vec<Complex64> = (0..=m)
            .map(|w| if w == 0 { ZERO } else { self.outward[w - 1] })
            .collect();
        let outward: Vec<Complex64> = (0..=m)
            .map(|w| if w == m { ZERO } else { self.inward[w + 1] })
            .collect();
        self.inward = inward;
        self.outward = outward;
    }
}

/// Success probability from the reduced dynamics; `config.target` is ignored.
pub fn run_symmetric(config: &RunConfig) -> Result<f64> {
    Ok(final_symmetric_state(config)?.marked_probability())
}

pub fn final_symmetric_state(config: &RunConfig) -> Result<SymmetricState> {
    config.validate()?;
    let coin = config.coin()?.operator();
    let mut state = SymmetricState::uniform(config.m);
    for _ in 0..config.iterations {
        state.step(&coin);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::final_state;
    use std::f64::consts::PI;

    #[test]
    fn matches_state_vector_amplitudes() {
        for (m, phi, zeta) in [(2, 1.0, 2.0), (3, PI, PI), (5, 0.3, 5.9), (6, 2.7, 3.6)] {
            let config = RunConfig::new(m, phi, zeta);
            let full = final_state(&config).unwrap();
            let reduced = final_symmetric_state(&config).unwrap();
            for d in 0..m {
                for x in 0..1usize << m {
                    let diff = (full.amplitude(d, x) - reduced.amplitude(d, x)).norm();
                    assert!(diff < 1e-13, "m={m} d={d} x={x} diff={diff}");
                }
            }
            assert!((reduced.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_norm() {
        for m in 2..12 {
            assert!((SymmetricState::uniform(m).norm() - 1.0).abs() < 1e-14);
            assert!(
                (SymmetricState::uniform(m).marked_probability() - 0.5f64.powi(m as i32)).abs()
                    < 1e-15
            );
        }
    }
}
