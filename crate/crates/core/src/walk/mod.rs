//! State-vector simulation of quantum walk search on the m-dimensional
//! hypercube.
//!
//! The joint state lives on `m * 2^m` basis vectors `(d, x)`: a coin
//! direction `d` and a node `x`. Amplitudes are stored direction-major, so
//! index `d * 2^m + x`. One iteration applies the node-conditional coin
//! (the traversing coin everywhere except the marked node, where the coin
//! block is negated) and then the shift `(d, x) -> (d, x ^ 2^d)`.

mod symmetric;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::{CoinMatrix, CoinOperator, CoinSpec, HouseholderCoin};
use crate::error::{invalid, Error, Result};

pub use symmetric::{final_symmetric_state, run_symmetric, SymmetricState};

const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// Number of search iterations for one marked node: `ceil(pi/2 * sqrt(2^(m-1)))`.
pub fn iteration_count(m: usize) -> usize {
    assert!(m >= 1, "coin dimension must be positive");
    let half = (m - 1) as i32;
    (PI / 2.0 * 2f64.powi(half).sqrt()).ceil() as usize
}

fn check_dimension(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::CoinDimension { got: m, min: 2 });
    }
    // m * 2^m complex amplitudes must fit comfortably in memory
    if m > 24 {
        return Err(invalid(
            "m",
            format!("coin dimension {m} is too large to simulate"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    m: usize,
    amplitudes: Vec<Complex64>,
}

impl WalkState {
    /// Equal-weight superposition over every `(direction, node)` pair.
    pub fn uniform(m: usize) -> Result<Self> {
        check_dimension(m)?;
        let len = m << m;
        let amp = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(Self {
            m,
            amplitudes: vec![amp; len],
        })
    }

    /// Builds a state from explicit amplitudes; the vector must be normalized.
    pub fn from_amplitudes(m: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dimension(m)?;
        if amplitudes.len() != m << m {
            return Err(invalid(
                "amplitudes",
                format!("expected {} entries, got {}", m << m, amplitudes.len()),
            ));
        }
        let state = Self { m, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid("amplitudes", format!("norm is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// Basis state `|d, x>`.
    pub fn basis(m: usize, direction: usize, node: usize) -> Result<Self> {
        check_dimension(m)?;
        if direction >= m || node >= 1 << m {
            return Err(invalid(
                "basis",
                format!("({direction}, {node}) out of range"),
            ));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); m << m];
        amplitudes[direction * (1 << m) + node] = Complex64::new(1.0, 0.0);
        Ok(Self { m, amplitudes })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> usize {
        1 << self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, direction: usize, node: usize) -> Complex64 {
        self.amplitudes[direction * self.nodes() + node]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Probability that a node-register measurement yields `node`.
    pub fn node_probability(&self, node: usize) -> f64 {
        let n = self.nodes();
        (0..self.m)
            .map(|d| self.amplitudes[d * n + node].norm_sqr())
            .sum()
    }

    /// Moves the amplitude at `(d, x)` to `(d, x ^ 2^d)`.
    pub fn apply_shift(&mut self) {
        let n = self.nodes();
        for d in 0..self.m {
            let bit = 1usize << d;
            let lane = &mut self.amplitudes[d * n..(d + 1) * n];
            for pair in lane.chunks_exact_mut(2 * bit) {
                let (lo, hi) = pair.split_at_mut(bit);
                lo.swap_with_slice(hi);
            }
        }
    }

    /// Applies `coin` to every node's coin block except `target`, whose block is
    /// negated. Rejects coins that are not unitary within 1e-10.
    pub fn apply_conditional_coin(&mut self, coin: &CoinMatrix, target: usize) -> Result<()> {
        if coin.dim() != self.m {
            return Err(Error::CoinShape {
                got: coin.dim(),
                expected: self.m,
            });
        }
        let deviation = coin.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitaryCoin { deviation });
        }
        self.check_target(target)?;
        self.conditional_coin(coin, target);
        Ok(())
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.nodes() {
            return Err(Error::TargetOutOfRange {
                target,
                nodes: self.nodes(),
            });
        }
        Ok(())
    }

    fn conditional_coin<C: ConditionalCoin + ?Sized>(&mut self, coin: &C, target: usize) {
        let n = self.nodes();
        let saved: Vec<Complex64> = (0..self.m)
            .map(|d| self.amplitudes[d * n + target])
            .collect();
        coin.apply_all(&mut self.amplitudes, n);
        for (d, a) in saved.into_iter().enumerate() {
            self.amplitudes[d * n + target] = -a;
        }
    }

    /// One search iteration: conditional coin, then shift.
    ///
    /// Fused into a single pass that writes the coined amplitude of `(d, x)`
    /// straight to `(d, x ^ 2^d)` in `scratch`, then swaps buffers.
    pub(crate) fn step(&mut self, coin: &HouseholderCoin, target: usize, scratch: &mut Scratch) {
        let n = self.nodes();
        let m = self.m;
        scratch.ensure(m, n);
        let sums = &mut scratch.sums;
        sums.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        for lane in self.amplitudes.chunks_exact(n) {
            for (s, a) in sums.iter_mut().zip(lane) {
                *s += a;
            }
        }
        let reflect = coin.reflect();
        for s in sums.iter_mut() {
            *s *= reflect;
        }
        let phase = coin.phase();
        let out = &mut scratch.buffer;
        for d in 0..m {
            let bit = 1usize << d;
            let src = &self.amplitudes[d * n..(d + 1) * n];
            let dst = &mut out[d * n..(d + 1) * n];
            for ((dst, src), sums) in dst
                .chunks_exact_mut(2 * bit)
                .zip(src.chunks_exact(2 * bit))
                .zip(sums.chunks_exact(2 * bit))
            {
                let (dst_lo, dst_hi) = dst.split_at_mut(bit);
                let (src_lo, src_hi) = src.split_at(bit);
                let (sum_lo, sum_hi) = sums.split_at(bit);
                for ((o, a), s) in dst_hi.iter_mut().zip(src_lo).zip(sum_lo) {
                    *o = phase * (a - s);
                }
                for ((o, a), s) in dst_lo.iter_mut().zip(src_hi).zip(sum_hi) {
                    *o = phase * (a - s);
                }
            }
            out[d * n + (target ^ bit)] = -self.amplitudes[d * n + target];
        }
        std::mem::swap(&mut self.amplitudes, &mut scratch.buffer);
    }
}

/// Reusable buffers for [`WalkState::step`].
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    sums: Vec<Complex64>,
    buffer: Vec<Complex64>,
}

impl Scratch {
    fn ensure(&mut self, m: usize, n: usize) {
        self.sums.resize(n, Complex64::new(0.0, 0.0));
        self.buffer.resize(m * n, Complex64::new(0.0, 0.0));
    }
}

/// Applies a coin to all node blocks of a direction-major amplitude vector.
trait ConditionalCoin {
    fn apply_all(&self, amplitudes: &mut [Complex64], nodes: usize);
}

impl ConditionalCoin for CoinMatrix {
    fn apply_all(&self, amplitudes: &mut [Complex64], nodes: usize) {
        let m = self.dim();
        let mut block = vec![Complex64::new(0.0, 0.0); m];
        for x in 0..nodes {
            for d in 0..m {
                block[d] = amplitudes[d * nodes + x];
            }
            self.apply_block(&mut block);
            for d in 0..m {
                amplitudes[d * nodes + x] = block[d];
            }
        }
    }
}

impl ConditionalCoin for HouseholderCoin {
    fn apply_all(&self, amplitudes: &mut [Complex64], nodes: usize) {
        let m = self.dim();
        let mut sums = vec![Complex64::new(0.0, 0.0); nodes];
        for lane in amplitudes.chunks_exact(nodes).take(m) {
            for (s, a) in sums.iter_mut().zip(lane) {
                *s += a;
            }
        }
        let reflect = self.reflect();
        for s in sums.iter_mut() {
            *s *= reflect;
        }
        let phase = self.phase();
        for lane in amplitudes.chunks_exact_mut(nodes).take(m) {
            for (a, s) in lane.iter_mut().zip(&sums) {
                *a = phase * (*a - s);
            }
        }
    }
}

/// One search run: coin parameters, marked node, and iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: usize,
    pub phi: f64,
    pub zeta: f64,
    pub target: usize,
    pub iterations: usize,
}

impl RunConfig {
    /// Marked node 0 and the standard iteration count for `m`.
    pub fn new(m: usize, phi: f64, zeta: f64) -> Self {
        Self {
            m,
            phi,
            zeta,
            target: 0,
            iterations: iteration_count(m.max(1)),
        }
    }

    pub fn with_target(mut self, target: usize) -> Self {
        self.target = target;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.m)?;
        if self.target >= 1 << self.m {
            return Err(Error::TargetOutOfRange {
                target: self.target,
                nodes: 1 << self.m,
            });
        }
        if self.iterations == 0 {
            return Err(Error::ZeroIterations);
        }
        Ok(())
    }

    pub fn coin(&self) -> Result<CoinSpec> {
        CoinSpec::new(self.m, self.phi, self.zeta)
    }
}

/// Final state after `config.iterations` steps from the uniform superposition.
pub fn final_state(config: &RunConfig) -> Result<WalkState> {
    config.validate()?;
    let coin = config.coin()?.operator();
    let mut state = WalkState::uniform(config.m)?;
    let mut scratch = Scratch::default();
    for _ in 0..config.iterations {
        state.step(&coin, config.target, &mut scratch);
    }
    Ok(state)
}

/// Probability of measuring the marked node at the end of the run.
pub fn run(config: &RunConfig) -> Result<f64> {
    Ok(final_state(config)?.node_probability(config.target))
}

/// Which simulation computes a success probability.
///
/// Both are exact; `Symmetric` restricts the dynamics to the subspace the
/// uniform start never leaves and is orders of magnitude faster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    StateVector,
    #[default]
    Symmetric,
}

impl Engine {
    pub fn probability(self, config: &RunConfig) -> Result<f64> {
        match self {
            Engine::StateVector => run(config),
            Engine::Symmetric => run_symmetric(config),
        }
    }

    /// Success probability at the standard iteration count.
    pub fn success(self, m: usize, phi: f64, zeta: f64) -> Result<f64> {
        self.probability(&RunConfig::new(m, phi, zeta))
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::StateVector => "state-vector",
            Engine::Symmetric => "symmetric",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state-vector" => Ok(Engine::StateVector),
            "symmetric" => Ok(Engine::Symmetric),
            other => Err(Error::Parse(format!(
                "unknown engine `{other}` (expected state-vector or symmetric)"
            ))),
        }
    }
}

/// Marked-node probability after `0, 1, ..., max_steps` iterations.
/// `config.iterations` is ignored.
pub fn probability_trace(config: &RunConfig, max_steps: usize) -> Result<Vec<f64>> {
    config.with_iterations(1).validate()?;
    let coin = config.coin()?.operator();
    let mut state = WalkState::uniform(config.m)?;
    let mut trace = Vec::with_capacity(max_steps + 1);
    trace.push(state.node_probability(config.target));
    let mut scratch = Scratch::default();
    for _ in 0..max_steps {
        state.step(&coin, config.target, &mut scratch);
        trace.push(state.node_probability(config.target));
    }
    Ok(trace)
}
