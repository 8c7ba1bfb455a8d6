//! Simulation and landscape analysis of quantum walk search on the
//! hypercube with a Householder-reflection-plus-phase qudit coin.

pub mod analysis;
pub mod coin;
pub mod error;
pub mod io;
pub mod surrogate;
pub mod sweep;
pub mod walk;

pub use coin::{build_coin, CoinMatrix, CoinSpec, CurveRelation};
pub use error::{Error, Result};
pub use sweep::{sweep_grid, sweep_random, SweepDataset, SweepRecord};
pub use walk::{iteration_count, run, Engine, RunConfig, WalkState};
