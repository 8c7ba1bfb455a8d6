use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrws_core::Engine;

use crate::heatmap::Scale;

/// Parses an angle in radians. Besides plain numbers this accepts multiples
/// and fractions of pi: `pi`, `-pi`, `2pi`, `pi/2`, `3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim().to_ascii_lowercase();
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("angle `{text}` is not finite"))
        };
    }
    let bad = || format!("cannot parse angle `{text}`");
    let (head, divisor) = match s.split_once('/') {
        Some((h, d)) => (h, d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let coeff = head.trim().strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.trim().trim_end_matches('*').trim();
    let k = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if divisor == 0.0 {
        return Err(bad());
    }
    Ok(k * PI / divisor)
}

#[derive(Debug, Parser)]
#[command(
    name = "qrws",
    version,
    about = "Quantum random walk search on the hypercube with a tunable qudit coin"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Simulation engine (overrides the config file).
    #[arg(long, global = true)]
    pub engine: Option<Engine>,
    /// Output directory (default: config file, then $QRWS_OUTPUT_DIR, then ./qrws-out).
    #[arg(long, short = 'o', global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success probability of a single search run.
    Run(RunArgs),
    /// Evaluate p over the (phi, zeta) plane, on a grid or at random points.
    Sweep(SweepArgs),
    /// Evaluate p along a zeta(phi) relation.
    Curve(CurveArgs),
    /// Plateau half-width of a curve around its maximum.
    Width(WidthArgs),
    /// Extract the ridge of a grid sweep and fit alpha.
    FitAlpha(FitAlphaArgs),
    /// sigma_p field over the (phi, alpha) plane.
    Robustness(RobustnessArgs),
    /// sigma_p / sigma_p' ratio map and its central-window statistics.
    Ratio(RatioArgs),
    /// Train the surrogate network.
    SurrogateTrain(SurrogateTrainArgs),
    /// Predict a surface and alpha with a trained surrogate.
    SurrogatePredict(SurrogatePredictArgs),
    /// Full analysis for a range of m with a manifest of all artifacts.
    Pipeline(PipelineArgs),
    /// Render a CSV field as a PGM image.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub zeta: f64,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Grid,
    Random,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value = "grid")]
    pub mode: SweepKind,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub phi_steps: Option<usize>,
    #[arg(long)]
    pub zeta_steps: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// CSV path (default: <out-dir>/sweep_m<m>.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationKind {
    Linear,
    Constant,
    Sinusoidal,
    /// Sinusoidal with alpha = -1/(2 pi).
    Benchmark,
}

#[derive(Debug, Args)]
pub struct RelationArgs {
    #[arg(long, value_enum)]
    pub relation: RelationKind,
    /// Amplitude for the sinusoidal relation.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub relation: RelationArgs,
    #[arg(long)]
    pub phi_steps: Option<usize>,
    /// CSV path (default: <out-dir>/curve_m<m>_<relation>.csv).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub relation: RelationArgs,
    #[arg(long)]
    pub phi_steps: Option<usize>,
    /// Threshold as a fraction of the curve maximum.
    #[arg(long, conflicts_with = "absolute")]
    pub fraction: Option<f64>,
    /// Threshold as a probability.
    #[arg(long)]
    pub absolute: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitAlphaArgs {
    /// Simulate a grid sweep for this m.
    #[arg(long, required_unless_present = "input")]
    pub m: Option<usize>,
    /// Existing grid sweep CSV (with its sidecar).
    #[arg(long, conflicts_with = "m")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub column_floor: Option<f64>,
    /// Also write the ridge points here.
    #[arg(long)]
    pub ridge_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlaneArgs {
    #[arg(long)]
    pub m: usize,
    /// Centre of the alpha distance weights (default: fitted alpha).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_center: Option<f64>,
    #[arg(long)]
    pub sigma_phi: Option<f64>,
    #[arg(long)]
    pub sigma_alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub plane: PlaneArgs,
    /// CSV path (default: <out-dir>/sigma_p_m<m>.csv); a PGM is written next to it.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub plane: PlaneArgs,
    /// Ratio level counted inside the central window.
    #[arg(long, default_value_t = 1e-2)]
    pub threshold: f64,
    /// CSV path (default: <out-dir>/ratio_m<m>.csv); a PGM is written next to it.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurrogateTrainArgs {
    /// Training data as `phi,zeta,m,p` CSVs; simulated grid points are used when absent.
    #[arg(long, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hidden_layers: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Simulated grid points per m when no data files are given.
    #[arg(long)]
    pub points_per_m: Option<usize>,
    /// Model path (default: <out-dir>/surrogate.json); the report goes to <model>.report.json.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurrogatePredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub phi_steps: Option<usize>,
    #[arg(long)]
    pub zeta_steps: Option<usize>,
    /// Also write the predicted surface as a CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Inclusive range such as `4..10`, or a single m.
    #[arg(long)]
    pub m: String,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// A `phi,zeta,m,p` grid CSV or a matrix CSV with axis row and column.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub scale: Scale,
}
