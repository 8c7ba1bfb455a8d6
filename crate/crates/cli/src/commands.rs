use std::io::Write;
use std::path::{Path, PathBuf};

use qrws_core::analysis::{
    curve_profile_with, extract_ridge, fit_alpha, fraction_below, probability_grid, ratio_map,
    sigma_p_from_probability, sigma_p_prime_with, width, RobustnessGrid, WidthMode,
};
use qrws_core::coin::BENCHMARK_ALPHA;
use qrws_core::io::{write_json, write_matrix_csv};
use qrws_core::surrogate::{
    grid_training_set, predict_surface, train_with_progress, SurrogateModel,
};
use qrws_core::sweep::{read_records, sweep_grid_with, sweep_random_with, SweepOptions};
use qrws_core::{CurveRelation, RunConfig, SweepDataset, SweepRecord};
use serde_json::json;

use crate::args::*;
use crate::config::Config;
use crate::error::{io_err, CliError};
use crate::heatmap::{write_heatmap, Field, Scale};
use crate::output::{ensure_dir, to_json_string, write_sidecar, write_table};
use crate::pipeline::{fit_for, parse_m_range, run_pipeline};

pub struct Context<'a> {
    pub config: Config,
    pub out_dir: PathBuf,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

impl Context<'_> {
    fn say(&mut self, line: impl std::fmt::Display) -> Result<(), CliError> {
        writeln!(self.out, "{line}").map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// `explicit`, or `name` inside the output directory (created on demand).
    fn output_path(&self, explicit: Option<&PathBuf>, name: String) -> Result<PathBuf, CliError> {
        let path = explicit.cloned().unwrap_or_else(|| self.out_dir.join(name));
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        Ok(path)
    }
}

pub fn dispatch(command: Command, ctx: &mut Context) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(a, ctx),
        Command::Sweep(a) => cmd_sweep(a, ctx),
        Command::Curve(a) => cmd_curve(a, ctx),
        Command::Width(a) => cmd_width(a, ctx),
        Command::FitAlpha(a) => cmd_fit_alpha(a, ctx),
        Command::Robustness(a) => cmd_robustness(a, ctx),
        Command::Ratio(a) => cmd_ratio(a, ctx),
        Command::SurrogateTrain(a) => cmd_surrogate_train(a, ctx),
        Command::SurrogatePredict(a) => cmd_surrogate_predict(a, ctx),
        Command::Pipeline(a) => cmd_pipeline(a, ctx),
        Command::Heatmap(a) => cmd_heatmap(a, ctx),
    }
}

fn cmd_run(a: RunArgs, ctx: &mut Context) -> Result<(), CliError> {
    let mut config = RunConfig::new(a.m, a.phi, a.zeta);
    if let Some(k) = a.iterations {
        config = config.with_iterations(k);
    }
    if let Some(t) = a.target {
        config = config.with_target(t);
    }
    config.validate()?;
    let p = ctx.config.engine.probability(&config)?;
    ctx.say(format!("m={} k={} p={p:.6}", config.m, config.iterations))
}

fn cmd_sweep(a: SweepArgs, ctx: &mut Context) -> Result<(), CliError> {
    let options = SweepOptions {
        engine: ctx.config.engine,
        iterations: a.iterations,
    };
    let c = &ctx.config;
    let dataset = match a.mode {
        SweepKind::Grid => sweep_grid_with(
            a.m,
            a.phi_steps.unwrap_or(c.phi_steps),
            a.zeta_steps.unwrap_or(c.zeta_steps),
            options,
        )?,
        SweepKind::Random => sweep_random_with(
            a.m,
            a.samples.unwrap_or(c.samples),
            a.seed.unwrap_or(c.seed),
            options,
        )?,
    };
    let path = ctx.output_path(a.output.as_ref(), format!("sweep_m{}.csv", a.m))?;
    dataset.write_csv(&path)?;
    let best = dataset.max_record().expect("non-empty sweep");
    ctx.say(format!(
        "wrote {} records to {}; max p={:.6} at phi={:.6} zeta={:.6}",
        dataset.len(),
        path.display(),
        best.p,
        best.phi,
        best.zeta
    ))
}

fn relation_of(a: &RelationArgs) -> Result<CurveRelation, CliError> {
    match (a.relation, a.alpha) {
        (RelationKind::Linear, None) => Ok(CurveRelation::Linear),
        (RelationKind::Constant, None) => Ok(CurveRelation::Constant),
        (RelationKind::Benchmark, None) => Ok(CurveRelation::Sinusoidal {
            alpha: BENCHMARK_ALPHA,
        }),
        (RelationKind::Sinusoidal, Some(alpha)) if alpha.is_finite() => {
            Ok(CurveRelation::Sinusoidal { alpha })
        }
        (RelationKind::Sinusoidal, _) => Err(CliError::Usage(
            "the sinusoidal relation needs a finite --alpha".into(),
        )),
        (_, Some(_)) => Err(CliError::Usage(
            "--alpha only applies to the sinusoidal relation".into(),
        )),
    }
}

fn cmd_curve(a: CurveArgs, ctx: &mut Context) -> Result<(), CliError> {
    let relation = relation_of(&a.relation)?;
    let steps = a.phi_steps.unwrap_or(ctx.config.phi_steps);
    let profile = curve_profile_with(a.m, relation, steps, ctx.config.engine)?;
    let path = ctx.output_path(
        a.output.as_ref(),
        format!("curve_m{}_{}.csv", a.m, relation.name()),
    )?;
    let rows: Vec<Vec<f64>> = profile
        .phis
        .iter()
        .zip(&profile.ps)
        .map(|(&phi, &p)| vec![phi, relation.zeta_of_phi(phi), p])
        .collect();
    write_table(&path, &["phi", "zeta", "p"], &rows)?;
    write_sidecar(
        &path,
        &json!({"m": a.m, "relation": relation, "p_max": profile.p_max, "phi_max": profile.phi_max}),
    )?;
    ctx.say(format!(
        "m={} relation={} p_max={:.6} phi_max={:.6} ({})",
        a.m,
        relation,
        profile.p_max,
        profile.phi_max,
        path.display()
    ))
}

fn cmd_width(a: WidthArgs, ctx: &mut Context) -> Result<(), CliError> {
    let relation = relation_of(&a.relation)?;
    let mode = match (a.fraction, a.absolute) {
        (_, Some(v)) => WidthMode::Absolute(v),
        (Some(v), None) => WidthMode::Fraction(v),
        (None, None) => WidthMode::Fraction(0.9),
    };
    let steps = a.phi_steps.unwrap_or(ctx.config.phi_steps);
    let profile = curve_profile_with(a.m, relation, steps, ctx.config.engine)?;
    let result = width(&profile, mode)?;
    ctx.say(to_json_string(&json!({
        "m": a.m,
        "relation": relation,
        "p_max": profile.p_max,
        "phi_max": profile.phi_max,
        "width": result,
    })))
}

/// Rows and columns of a row-major `phi,zeta,m,p` grid, inferred from the
/// runs of equal `phi`.
fn grid_shape(records: &[SweepRecord]) -> Option<(usize, usize)> {
    let first = records.first()?.phi;
    let cols = records.iter().take_while(|r| r.phi == first).count();
    (cols > 0 && records.len().is_multiple_of(cols)).then(|| (records.len() / cols, cols))
}

fn cmd_fit_alpha(a: FitAlphaArgs, ctx: &mut Context) -> Result<(), CliError> {
    let floor = a.column_floor.unwrap_or(ctx.config.column_floor);
    let (m, ridge) = match (&a.input, a.m) {
        (Some(path), _) => {
            let dataset = SweepDataset::read_csv(path)?;
            (dataset.meta.m, extract_ridge(&dataset, floor)?)
        }
        (None, Some(m)) => {
            let config = Config {
                column_floor: floor,
                ..ctx.config.clone()
            };
            let (_, ridge, _) = fit_for(m, &config)?;
            (m, ridge)
        }
        (None, None) => return Err(CliError::Usage("give --m or --input".into())),
    };
    let alpha = fit_alpha(&ridge)?;
    if let Some(path) = &a.ridge_output {
        let rows: Vec<Vec<f64>> = ridge.iter().map(|pt| vec![pt.phi, pt.zeta, pt.p]).collect();
        write_table(path, &["phi", "zeta", "p"], &rows)?;
        write_sidecar(path, &json!({"m": m, "column_floor": floor}))?;
    }
    ctx.say(to_json_string(&json!({
        "m": m,
        "alpha": alpha,
        "column_floor": floor,
        "ridge_points": ridge.len(),
    })))
}

struct PlaneResult {
    sigma: RobustnessGrid,
    alpha_center: f64,
}

fn sigma_field(a: &PlaneArgs, ctx: &Context) -> Result<PlaneResult, CliError> {
    let c = &ctx.config;
    let alpha_center = match a.alpha_center {
        Some(v) => v,
        None => fit_for(a.m, c)?.2,
    };
    let probability = probability_grid(a.m, &c.plane_grid(), c.engine)?;
    let sigma = sigma_p_from_probability(
        &probability,
        alpha_center,
        a.sigma_phi.unwrap_or(c.sigma_phi),
        a.sigma_alpha.unwrap_or(c.sigma_alpha),
    )?;
    Ok(PlaneResult {
        sigma,
        alpha_center,
    })
}

fn write_field(
    path: &Path,
    grid: &RobustnessGrid,
    meta: serde_json::Value,
) -> Result<PathBuf, CliError> {
    write_matrix_csv(
        path,
        &grid.phis,
        &grid.alphas,
        &grid.values,
        Some(&grid.valid),
    )?;
    write_sidecar(path, &meta)?;
    let pgm = path.with_extension("pgm");
    write_heatmap(
        &Field {
            rows: grid.rows(),
            cols: grid.cols(),
            values: &grid.values,
            valid: Some(&grid.valid),
        },
        &pgm,
        Scale::Log,
    )?;
    Ok(pgm)
}

fn cmd_robustness(a: RobustnessArgs, ctx: &mut Context) -> Result<(), CliError> {
    let PlaneResult {
        sigma,
        alpha_center,
    } = sigma_field(&a.plane, ctx)?;
    let path = ctx.output_path(a.output.as_ref(), format!("sigma_p_m{}.csv", a.plane.m))?;
    write_field(
        &path,
        &sigma,
        json!({"m": a.plane.m, "kind": sigma.kind, "alpha_center": sigma.alpha_center}),
    )?;
    let centre = match (sigma.center_row(), sigma.center_col()) {
        (Some(i), Some(j)) => sigma.get(i, j),
        _ => None,
    };
    let all = (0, sigma.rows() - 1);
    ctx.say(to_json_string(&json!({
        "m": a.plane.m,
        "alpha_center": alpha_center,
        "alpha_center_grid": sigma.alpha_center,
        "sigma_p_at_center": centre,
        "fraction_below_1e-2": fraction_below(&sigma, all, 1e-2),
        "fraction_below_1e-4": fraction_below(&sigma, all, 1e-4),
        "output": path,
    })))
}

fn cmd_ratio(a: RatioArgs, ctx: &mut Context) -> Result<(), CliError> {
    let PlaneResult { sigma, .. } = sigma_field(&a.plane, ctx)?;
    let c = &ctx.config;
    let prime = sigma_p_prime_with(
        a.plane.m,
        a.plane.sigma_phi.unwrap_or(c.sigma_phi),
        c.plane_grid().phi_steps,
        c.engine,
    )?;
    let ratio = ratio_map(&sigma, &prime)?;
    let window = prime.central_window(c.window_fraction);
    let path = ctx.output_path(a.output.as_ref(), format!("ratio_m{}.csv", a.plane.m))?;
    write_field(
        &path,
        &ratio,
        json!({"m": a.plane.m, "kind": ratio.kind, "alpha_center": ratio.alpha_center}),
    )?;
    let grid = &ratio;
    let min_in_window = (window.0..=window.1)
        .flat_map(|i| (0..grid.cols()).filter_map(move |j| grid.get(i, j)))
        .fold(f64::INFINITY, f64::min);
    ctx.say(to_json_string(&json!({
        "m": a.plane.m,
        "central_window_rows": [window.0, window.1],
        "central_window_phi": [ratio.phis[window.0], ratio.phis[window.1]],
        "threshold": a.threshold,
        "fraction_below": fraction_below(&ratio, window, a.threshold),
        "min_in_window": if min_in_window.is_finite() { Some(min_in_window) } else { None },
        "output": path,
    })))
}

fn cmd_surrogate_train(a: SurrogateTrainArgs, ctx: &mut Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let mut train_config = c.surrogate;
    if let Some(v) = a.epochs {
        train_config.epochs = v;
    }
    if let Some(v) = a.seed {
        train_config.seed = v;
    }
    if let Some(v) = a.hidden_layers {
        train_config.hidden_layers = v;
    }
    if let Some(v) = a.width {
        train_config.width = v;
    }
    if let Some(v) = a.learning_rate {
        train_config.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        train_config.batch_size = v;
    }
    let records = if a.data.is_empty() {
        grid_training_set(
            &c.surrogate_ms,
            c.phi_steps,
            a.points_per_m.unwrap_or(c.surrogate_points_per_m),
            c.surrogate_data_seed,
            c.engine,
        )?
    } else {
        let mut all = Vec::new();
        for path in &a.data {
            all.extend(read_records(path)?);
        }
        all
    };
    let every = (train_config.epochs / 10).max(1);
    let err = &mut *ctx.err;
    let (model, report) = train_with_progress(&records, &train_config, |epoch, t, v| {
        if epoch % every == 0 || epoch + 1 == train_config.epochs {
            let _ = writeln!(err, "epoch {epoch}: train {t:.3e} validation {v:.3e}");
        }
    })?;
    let path = ctx.output_path(a.output.as_ref(), "surrogate.json".to_string())?;
    std::fs::write(&path, model.to_json() + "\n").map_err(|e| io_err(&path, e))?;
    let report_path = path.with_extension("report.json");
    write_json(
        &report_path,
        &json!({"config": train_config, "records": records.len(), "report": report}),
    )?;
    ctx.say(format!(
        "trained on {} records: train MSE {:.3e}, validation MSE {:.3e}; model {}",
        records.len(),
        report.final_train_loss,
        report.final_validation_loss,
        path.display()
    ))
}

fn cmd_surrogate_predict(a: SurrogatePredictArgs, ctx: &mut Context) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.model).map_err(|e| io_err(&a.model, e))?;
    let model = SurrogateModel::from_json(&text)?;
    let c = &ctx.config;
    let surface = predict_surface(
        &model,
        a.m,
        a.phi_steps.unwrap_or(c.phi_steps),
        a.zeta_steps.unwrap_or(c.zeta_steps),
    )?;
    let alpha = fit_alpha(&surface.ridge(c.column_floor)?)?;
    if let Some(path) = &a.output {
        surface.write_csv(path)?;
    }
    let p_max = surface.p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pi_row = surface
        .phis
        .iter()
        .position(|&phi| phi == std::f64::consts::PI);
    ctx.say(to_json_string(&json!({
        "m": a.m,
        "alpha": alpha,
        "p_max": p_max,
        "zeta_argmax_at_phi_pi": pi_row.map(|i| surface.zetas[surface.row_argmax(i)]),
    })))
}

fn cmd_pipeline(a: PipelineArgs, ctx: &mut Context) -> Result<(), CliError> {
    let ms = parse_m_range(&a.m)?;
    let manifest = run_pipeline(&ms, &ctx.config, &ctx.out_dir)?;
    for run in &manifest.runs {
        ctx.say(format!(
            "m={} k={} alpha_fit={:.4} artifacts={}",
            run.m,
            run.iterations,
            run.alpha_fit,
            run.artifacts.len()
        ))?;
    }
    ctx.say(format!(
        "manifest: {}",
        ctx.out_dir.join(crate::pipeline::MANIFEST_NAME).display()
    ))
}

/// Reads a matrix CSV as written for `(phi, alpha)` fields: an axis header
/// row with an empty corner, then one row per `phi`. `nan` marks invalid cells.
fn read_matrix_csv(path: &Path) -> Result<(usize, usize, Vec<f64>, Vec<bool>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let mut rows = 0;
    let mut cols = None;
    let mut values = Vec::new();
    let mut valid = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        if i == 0 {
            cols = Some(rec.len() - 1);
            continue;
        }
        if Some(rec.len() - 1) != cols {
            return Err(io_err(
                path,
                format!("row {i} has the wrong number of cells"),
            ));
        }
        for cell in rec.iter().skip(1) {
            let v: f64 = cell
                .parse()
                .map_err(|_| io_err(path, format!("row {i}: bad number `{cell}`")))?;
            valid.push(v.is_finite());
            values.push(v);
        }
        rows += 1;
    }
    Ok((rows, cols.unwrap_or(0), values, valid))
}

fn cmd_heatmap(a: HeatmapArgs, ctx: &mut Context) -> Result<(), CliError> {
    let first_line = std::fs::read_to_string(&a.input)
        .map_err(|e| io_err(&a.input, e))?
        .lines()
        .next()
        .unwrap_or_default()
        .to_string();
    let (rows, cols, values, valid) = if first_line.starts_with("phi,zeta,m,p") {
        let records = read_records(&a.input)?;
        let (rows, cols) = grid_shape(&records)
            .ok_or_else(|| io_err(&a.input, "records do not form a row-major grid"))?;
        let values: Vec<f64> = records.iter().map(|r| r.p).collect();
        let valid = values.iter().map(|v| v.is_finite()).collect();
        (rows, cols, values, valid)
    } else {
        read_matrix_csv(&a.input)?
    };
    if let Some(parent) = a.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_heatmap(
        &Field {
            rows,
            cols,
            values: &values,
            valid: Some(&valid),
        },
        &a.output,
        a.scale,
    )?;
    ctx.say(format!(
        "wrote {rows}x{cols} heatmap to {}",
        a.output.display()
    ))
}
