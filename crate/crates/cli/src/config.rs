use std::path::{Path, PathBuf};

use qrws_core::surrogate::TrainConfig;
use qrws_core::Engine;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QRWS_OUTPUT_DIR";

/// Directory used when neither a flag, the config file nor the environment
/// names one.
pub const FALLBACK_OUTPUT_DIR: &str = "qrws-out";

/// Shared defaults for every subcommand. Any field missing from a config
/// file keeps the value below; command-line flags override both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub output_dir: Option<PathBuf>,
    pub engine: Engine,
    /// `(phi, zeta)` sweep grid and curve sampling resolution.
    pub phi_steps: usize,
    pub zeta_steps: usize,
    /// Random sweeps.
    pub samples: usize,
    pub seed: u64,
    /// Ridge columns below this fraction of the global maximum are ignored.
    pub column_floor: f64,
    pub sigma_phi: f64,
    pub sigma_alpha: f64,
    pub alpha_steps: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Rows with `p' >= window_fraction * max p'` form the central window.
    pub window_fraction: f64,
    pub width_fractions: Vec<f64>,
    pub width_absolutes: Vec<f64>,
    pub surrogate: TrainConfig,
    pub surrogate_ms: Vec<usize>,
    pub surrogate_points_per_m: usize,
    pub surrogate_data_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            output_dir: None,
            engine: Engine::default(),
            phi_steps: 180,
            zeta_steps: 180,
            samples: 100_000,
            seed: 17,
            column_floor: qrws_core::analysis::DEFAULT_COLUMN_FLOOR,
            sigma_phi: 0.1,
            sigma_alpha: 0.1,
            alpha_steps: 250,
            alpha_min: -1.5,
            alpha_max: 1.0,
            window_fraction: 0.5,
            width_fractions: vec![0.9, 0.7],
            width_absolutes: vec![0.37, 0.31],
            surrogate: TrainConfig::default(),
            surrogate_ms: (2..=10).collect(),
            surrogate_points_per_m: 4000,
            surrogate_data_seed: 17,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Flag, then config file, then environment, then the fallback.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }

    pub fn plane_grid(&self) -> qrws_core::analysis::PlaneGrid {
        qrws_core::analysis::PlaneGrid {
            phi_steps: self.phi_steps,
            alpha_steps: self.alpha_steps,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
        }
    }
}
