use std::path::{Path, PathBuf};

use qrws_core::analysis::{
    curve_profile_with, extract_ridge, fit_alpha, probability_grid, ratio_map,
    sigma_p_from_probability, sigma_p_prime_from_profile, width, CurveProfile, RidgePoint,
    RobustnessGrid, SigmaPrime, WidthMode, WidthResult,
};
use qrws_core::coin::BENCHMARK_ALPHA;
use qrws_core::io::write_matrix_csv;
use qrws_core::sweep::{sweep_grid_with, SweepOptions};
use qrws_core::{iteration_count, CurveRelation, SweepDataset};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::Config;
use crate::error::{io_err, CliError};
use crate::heatmap::{write_heatmap, Field, Scale};
use crate::output::{ensure_dir, write_sidecar, write_table};

pub const MANIFEST_FORMAT: &str = "qrws-pipeline/1";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const PARTIAL_SUFFIX: &str = ".partial";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub kind: String,
    /// Metadata sidecar, when the artifact has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<String>,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub m: usize,
    pub iterations: usize,
    pub alpha_fit: f64,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: Config,
    pub runs: Vec<RunManifest>,
}

/// The four curves every pipeline run evaluates, with their file tags.
pub fn pipeline_relations(alpha_fit: f64) -> [(&'static str, CurveRelation); 4] {
    [
        ("linear", CurveRelation::Linear),
        ("constant", CurveRelation::Constant),
        (
            "benchmark",
            CurveRelation::Sinusoidal {
                alpha: BENCHMARK_ALPHA,
            },
        ),
        ("fit", CurveRelation::Sinusoidal { alpha: alpha_fit }),
    ]
}

/// Parses `a..b` or `a..=b` (both inclusive) or a single `m`.
pub fn parse_m_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid m range `{text}`, expected e.g. 4..10"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let m = num(text)?;
            (m, m)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// Tracks files as they are written so a failed run can mark them.
struct Sink {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    fn path(&mut self, rel: &str) -> PathBuf {
        let path = self.root.join(rel);
        self.written.push(path.clone());
        path
    }

    fn abandon(&self) {
        for path in &self.written {
            if path.exists() {
                let mut partial = path.clone().into_os_string();
                partial.push(PARTIAL_SUFFIX);
                let _ = std::fs::rename(path, partial);
            }
        }
    }
}

fn rel(m: usize, name: &str) -> String {
    format!("m{m:02}/{name}")
}

fn sidecar_rel(rel_path: &str) -> String {
    let stem = rel_path.strip_suffix(".csv").unwrap_or(rel_path);
    format!("{stem}.meta.json")
}

/// Everything computed for one coin dimension.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub m: usize,
    pub sweep: SweepDataset,
    pub ridge: Vec<RidgePoint>,
    pub alpha_fit: f64,
    pub curves: Vec<(&'static str, CurveProfile)>,
    pub sigma_p: RobustnessGrid,
    pub sigma_prime: SigmaPrime,
    pub ratio: RobustnessGrid,
}

/// Grid sweep, ridge and fitted `alpha` for one `m`.
pub fn fit_for(
    m: usize,
    config: &Config,
) -> Result<(SweepDataset, Vec<RidgePoint>, f64), CliError> {
    let options = SweepOptions {
        engine: config.engine,
        iterations: None,
    };
    let sweep = sweep_grid_with(m, config.phi_steps, config.zeta_steps, options)?;
    let ridge = extract_ridge(&sweep, config.column_floor)?;
    let alpha = fit_alpha(&ridge)?;
    Ok((sweep, ridge, alpha))
}

pub fn analyse(m: usize, config: &Config) -> Result<Analysis, CliError> {
    let (sweep, ridge, alpha_fit) = fit_for(m, config)?;
    let curves = pipeline_relations(alpha_fit)
        .into_iter()
        .map(|(tag, rel)| {
            Ok((
                tag,
                curve_profile_with(m, rel, config.phi_steps, config.engine)?,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let probability = probability_grid(m, &config.plane_grid(), config.engine)?;
    let sigma_p = sigma_p_from_probability(
        &probability,
        alpha_fit,
        config.sigma_phi,
        config.sigma_alpha,
    )?;
    let constant = &curves[1].1;
    let sigma_prime = if constant.phis == sigma_p.phis {
        sigma_p_prime_from_profile(m, &constant.phis, &constant.ps, config.sigma_phi)
    } else {
        let profile = curve_profile_with(
            m,
            CurveRelation::Constant,
            config.plane_grid().phi_steps,
            config.engine,
        )?;
        sigma_p_prime_from_profile(m, &profile.phis, &profile.ps, config.sigma_phi)
    };
    let ratio = ratio_map(&sigma_p, &sigma_prime)?;
    Ok(Analysis {
        m,
        sweep,
        ridge,
        alpha_fit,
        curves,
        sigma_p,
        sigma_prime,
        ratio,
    })
}

#[derive(Serialize)]
struct WidthEntry<'a> {
    relation: &'a str,
    curve: CurveRelation,
    p_max: f64,
    phi_max: f64,
    #[serde(flatten)]
    width: WidthResult,
}

pub fn width_modes(config: &Config) -> Vec<WidthMode> {
    config
        .width_fractions
        .iter()
        .map(|&f| WidthMode::Fraction(f))
        .chain(
            config
                .width_absolutes
                .iter()
                .map(|&a| WidthMode::Absolute(a)),
        )
        .collect()
}

pub fn width_file_name(mode: WidthMode) -> String {
    format!("width_{}_{}.json", mode.name(), mode.value())
}

fn write_run(a: &Analysis, config: &Config, sink: &mut Sink) -> Result<RunManifest, CliError> {
    let m = a.m;
    ensure_dir(&sink.root.join(format!("m{m:02}")))?;
    let mut artifacts = Vec::new();
    let mut add = |path: String, kind: &str, meta: Option<String>, params: serde_json::Value| {
        artifacts.push(Artifact {
            path,
            kind: kind.to_string(),
            meta,
            params,
        })
    };

    let r = rel(m, "sweep.csv");
    let path = sink.path(&r);
    sink.path(&sidecar_rel(&r));
    a.sweep.write_csv(&path)?;
    add(
        r.clone(),
        "sweep",
        Some(sidecar_rel(&r)),
        json!({"phi_steps": config.phi_steps, "zeta_steps": config.zeta_steps}),
    );

    let r = rel(m, "sweep.pgm");
    let (rows, cols) = a.sweep.grid_dims().expect("grid sweep");
    let p: Vec<f64> = a.sweep.records.iter().map(|rec| rec.p).collect();
    write_heatmap(
        &Field {
            rows,
            cols,
            values: &p,
            valid: None,
        },
        &sink.path(&r),
        Scale::Linear,
    )?;
    add(
        r,
        "heatmap",
        None,
        json!({"field": "probability", "scale": "linear"}),
    );

    let r = rel(m, "ridge.csv");
    let path = sink.path(&r);
    let rows: Vec<Vec<f64>> = a
        .ridge
        .iter()
        .map(|pt| vec![pt.phi, pt.zeta, pt.p])
        .collect();
    write_table(&path, &["phi", "zeta", "p"], &rows)?;
    sink.path(&sidecar_rel(&r));
    write_sidecar(&path, &json!({"m": m, "column_floor": config.column_floor}))?;
    add(
        r.clone(),
        "ridge",
        Some(sidecar_rel(&r)),
        json!({"column_floor": config.column_floor}),
    );

    let r = rel(m, "alpha.json");
    qrws_core::io::write_json(
        &sink.path(&r),
        &json!({
            "m": m,
            "alpha": a.alpha_fit,
            "column_floor": config.column_floor,
            "ridge_points": a.ridge.len(),
        }),
    )?;
    add(r, "alpha", None, json!({}));

    for (tag, profile) in &a.curves {
        let r = rel(m, &format!("curve_{tag}.csv"));
        let path = sink.path(&r);
        let rows: Vec<Vec<f64>> = profile
            .phis
            .iter()
            .zip(&profile.ps)
            .map(|(&phi, &p)| vec![phi, profile.relation.zeta_of_phi(phi), p])
            .collect();
        write_table(&path, &["phi", "zeta", "p"], &rows)?;
        sink.path(&sidecar_rel(&r));
        write_sidecar(
            &path,
            &json!({
                "m": m,
                "relation": profile.relation,
                "iterations": iteration_count(m),
                "p_max": profile.p_max,
                "phi_max": profile.phi_max,
            }),
        )?;
        add(
            r.clone(),
            "curve",
            Some(sidecar_rel(&r)),
            json!({"relation": profile.relation}),
        );
    }

    for mode in width_modes(config) {
        let r = rel(m, &width_file_name(mode));
        let entries = a
            .curves
            .iter()
            .map(|(tag, profile)| {
                Ok(WidthEntry {
                    relation: tag,
                    curve: profile.relation,
                    p_max: profile.p_max,
                    phi_max: profile.phi_max,
                    width: width(profile, mode)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        qrws_core::io::write_json(
            &sink.path(&r),
            &json!({"m": m, "mode": mode, "curves": entries}),
        )?;
        add(r, "width", None, json!({"mode": mode}));
    }

    let field_meta = |grid: &RobustnessGrid| {
        json!({
            "m": m,
            "kind": grid.kind,
            "rows": "phi",
            "columns": "alpha",
            "alpha_center": grid.alpha_center,
            "sigma_phi": config.sigma_phi,
            "sigma_alpha": config.sigma_alpha,
        })
    };
    for (name, grid) in [("sigma_p", &a.sigma_p), ("ratio", &a.ratio)] {
        let r = rel(m, &format!("{name}.csv"));
        let path = sink.path(&r);
        write_matrix_csv(
            &path,
            &grid.phis,
            &grid.alphas,
            &grid.values,
            Some(&grid.valid),
        )?;
        sink.path(&sidecar_rel(&r));
        write_sidecar(&path, &field_meta(grid))?;
        add(
            r,
            name,
            Some(sidecar_rel(&rel(m, &format!("{name}.csv")))),
            json!({"alpha_center": grid.alpha_center}),
        );

        let r = rel(m, &format!("{name}.pgm"));
        write_heatmap(
            &Field {
                rows: grid.rows(),
                cols: grid.cols(),
                values: &grid.values,
                valid: Some(&grid.valid),
            },
            &sink.path(&r),
            Scale::Log,
        )?;
        add(r, "heatmap", None, json!({"field": name, "scale": "log"}));
    }

    let r = rel(m, "sigma_p_prime.csv");
    let path = sink.path(&r);
    let sp = &a.sigma_prime;
    let rows: Vec<Vec<f64>> = (0..sp.phis.len())
        .map(|i| {
            vec![
                sp.phis[i],
                sp.p_prime[i],
                if sp.valid[i] { sp.values[i] } else { f64::NAN },
            ]
        })
        .collect();
    write_table(&path, &["phi", "p_prime", "sigma_p_prime"], &rows)?;
    let window = sp.central_window(config.window_fraction);
    sink.path(&sidecar_rel(&r));
    write_sidecar(
        &path,
        &json!({
            "m": m,
            "sigma_phi": config.sigma_phi,
            "window_fraction": config.window_fraction,
            "central_window_rows": [window.0, window.1],
        }),
    )?;
    add(r.clone(), "sigma_p_prime", Some(sidecar_rel(&r)), json!({}));

    Ok(RunManifest {
        m,
        iterations: iteration_count(m),
        alpha_fit: a.alpha_fit,
        artifacts,
    })
}

/// Runs the full analysis for every `m` and writes its artifacts under
/// `out_dir/mNN/` plus `out_dir/manifest.json`. On failure every file written
/// so far gets a `.partial` suffix and no manifest is written.
pub fn run_pipeline(ms: &[usize], config: &Config, out_dir: &Path) -> Result<Manifest, CliError> {
    if ms.is_empty() {
        return Err(CliError::Usage("empty m range".into()));
    }
    for &m in ms {
        if !(2..=24).contains(&m) {
            return Err(CliError::Usage(format!("m={m} is outside 2..=24")));
        }
    }
    ensure_dir(out_dir)?;
    let mut sink = Sink {
        root: out_dir.to_path_buf(),
        written: Vec::new(),
    };
    let result = (|| {
        let mut runs = Vec::with_capacity(ms.len());
        for &m in ms {
            let analysis = analyse(m, config)?;
            runs.push(write_run(&analysis, config, &mut sink)?);
        }
        let manifest = Manifest {
            format: MANIFEST_FORMAT.to_string(),
            config: Config {
                output_dir: None,
                ..config.clone()
            },
            runs,
        };
        let path = sink.path(MANIFEST_NAME);
        qrws_core::io::write_json(&path, &manifest)?;
        Ok(manifest)
    })();
    if result.is_err() {
        sink.abandon();
    }
    result
}

pub fn read_manifest(out_dir: &Path) -> Result<Manifest, CliError> {
    let path = out_dir.join(MANIFEST_NAME);
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}
