use std::f64::consts::PI;

use qrws_core::analysis::*;
use qrws_core::coin::BENCHMARK_ALPHA;
use qrws_core::sweep::{angle_grid, sweep_grid, sweep_random};
use qrws_core::{run, CurveRelation, Engine, RunConfig};

const TOL: f64 = 0.01;

fn fitted_alpha(m: usize) -> f64 {
    let ds = sweep_grid(m, 180, 180).unwrap();
    fit_alpha(&extract_ridge(&ds, DEFAULT_COLUMN_FLOOR).unwrap()).unwrap()
}

#[test]
fn random_sweep_hits_the_ridge_and_is_reproducible() {
    let a = sweep_random(8, 10_000, 3).unwrap();
    assert!(a.max_record().unwrap().p >= 0.40);
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    a.write_csv(&pa).unwrap();
    sweep_random(8, 10_000, 3).unwrap().write_csv(&pb).unwrap();
    assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    let back = qrws_core::SweepDataset::read_csv(&pa).unwrap();
    assert_eq!(back.meta, a.meta);
    assert_eq!(back.len(), a.len());
}

#[test]
fn m5_grid_peaks_at_grover_point() {
    let ds = sweep_grid(5, 180, 180).unwrap();
    assert_eq!(ds.len(), 32_400);
    let best = ds.max_record().unwrap();
    assert!((best.p - 0.4137).abs() < TOL, "{best:?}");
    let at_pi = ds.records[89 * 180 + 89];
    assert_eq!((at_pi.phi, at_pi.zeta), (PI, PI));
    assert!((at_pi.p - best.p).abs() < 1e-12);

    // 1% spot check through the full state-vector engine
    for k in (0..ds.len()).step_by(100) {
        let r = ds.records[k];
        let p = run(&RunConfig::new(5, r.phi, r.zeta)).unwrap();
        assert!((p - r.p).abs() < 1e-10);
    }
}

#[test]
fn zeta_pi_row_peaks_at_phi_pi() {
    for m in 4..=9 {
        let phis = angle_grid(180);
        let ps: Vec<f64> = phis
            .iter()
            .map(|&phi| Engine::Symmetric.success(m, phi, PI).unwrap())
            .collect();
        let best = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((ps[89] - best).abs() < 1e-12, "m={m}");
    }
}

#[test]
fn curve_maxima() {
    let c5 = curve_profile(5, CurveRelation::Constant, 180).unwrap();
    assert!((c5.p_max - 0.4137).abs() < TOL);
    assert_eq!(c5.phi_max, PI);

    let b7 = curve_profile(
        7,
        CurveRelation::Sinusoidal {
            alpha: BENCHMARK_ALPHA,
        },
        180,
    )
    .unwrap();
    assert!((b7.p_max - 0.4082).abs() < TOL);
    assert!(b7
        .maxima(1e-12)
        .iter()
        .all(|&phi| { (phi - 2.7925).abs() < 0.05 || (phi - 3.4907).abs() < 0.05 }));

    let c11 = curve_profile(11, CurveRelation::Constant, 180).unwrap();
    assert!((c11.p_max - 0.4414).abs() < TOL);
}

#[test]
fn width_examples() {
    let prof = curve_profile(9, CurveRelation::Sinusoidal { alpha: -0.185 }, 180).unwrap();
    let w = width(&prof, WidthMode::Fraction(0.9)).unwrap();
    assert!((w.eps - PI / 4.0).abs() < 0.15, "{}", w.eps);

    let spacing = 2.0 * PI / 180.0;
    let w1 = width(&prof, WidthMode::Fraction(1.0)).unwrap();
    assert!(w1.eps >= 0.0 && w1.eps <= spacing);

    // widths never shrink as the threshold drops
    let mut last = 0.0;
    for f in [1.0, 0.95, 0.9, 0.8, 0.7, 0.5, 0.3] {
        let e = width(&prof, WidthMode::Fraction(f)).unwrap().eps;
        assert!(e >= last - 1e-12);
        last = e;
    }
}

#[test]
fn width_trends() {
    let mut constant = Vec::new();
    for m in 6..=10 {
        let alpha = fitted_alpha(m);
        let eps = |rel| {
            let prof = curve_profile(m, rel, 180).unwrap();
            width(&prof, WidthMode::Fraction(0.9)).unwrap().eps
        };
        let fit = eps(CurveRelation::Sinusoidal { alpha });
        let lin = eps(CurveRelation::Linear);
        let con = eps(CurveRelation::Constant);
        assert!(fit >= lin, "m={m}: fit {fit} < linear {lin}");
        assert!(con < fit, "m={m}");
        if m >= 7 {
            assert!((0.6..=1.0).contains(&fit), "m={m}: {fit}");
        }
        constant.push(con);
    }
    assert!(constant.windows(2).all(|w| w[1] < w[0]), "{constant:?}");
}

#[test]
fn ridge_and_fit_examples() {
    let ds = sweep_grid(8, 180, 180).unwrap();
    let ridge = extract_ridge(&ds, DEFAULT_COLUMN_FLOOR).unwrap();
    let at_pi = ridge.iter().find(|pt| pt.phi == PI).unwrap();
    assert_eq!(at_pi.zeta, PI);

    assert!((fitted_alpha(10) - -0.168).abs() < 0.05);
    assert!((fitted_alpha(5) - -0.155).abs() < 0.05);
    for m in 4..=10 {
        assert!(fitted_alpha(m) < 0.0, "m={m}");
    }
}

#[test]
fn p_of_phi_alpha_examples() {
    let grover = run(&RunConfig::new(5, PI, PI)).unwrap();
    assert!((grover - 0.4137).abs() < TOL);
    for alpha in [-1.5, -0.3, 0.0, 0.7] {
        assert!((p_of_phi_alpha(5, PI, alpha).unwrap() - grover).abs() < 1e-12);
    }

    let lin = curve_profile(6, CurveRelation::Linear, 36).unwrap();
    for (&phi, &p) in lin.phis.iter().zip(&lin.ps) {
        assert!((p_of_phi_alpha(6, phi, 0.0).unwrap() - p).abs() < 1e-12);
    }

    let prof = curve_profile(9, CurveRelation::Sinusoidal { alpha: -0.185 }, 180).unwrap();
    let floor = 0.9 * prof.p_max;
    assert!(p_of_phi_alpha(9, PI - 0.2, -0.185).unwrap() >= floor);
    assert!(p_of_phi_alpha(9, PI - 0.2, 0.0).unwrap() >= floor);
}

#[test]
fn sigma_fields() {
    let alpha = fitted_alpha(5);
    let sigma = sigma_p_grid(5, alpha, 0.1, 0.1).unwrap();
    let (i, j) = (sigma.center_row().unwrap(), sigma.center_col().unwrap());
    assert_eq!(i, 89);
    assert_eq!(sigma.get(i, j), Some(0.0));
    let outer = region_around(&sigma, i, j, |v| v < 0.01).unwrap();
    let inner = region_around(&sigma, i, j, |v| v <= 1e-4).unwrap();
    assert!(outer.cells > inner.cells && inner.cells > 1);
    assert!(outer.row_min <= inner.row_min && inner.row_max <= outer.row_max);

    let prime = sigma_p_prime(9, 0.1).unwrap();
    let pi_row = prime.phis.iter().position(|&phi| phi == PI).unwrap();
    assert_eq!(prime.values[pi_row], 0.0);
    assert!(prime
        .values
        .iter()
        .zip(&prime.valid)
        .any(|(&v, &ok)| ok && v > 1.0));
}

#[test]
fn ratio_of_broadcast_field_is_one() {
    let prime = sigma_p_prime(6, 0.1).unwrap();
    let alphas = vec![-0.5, 0.0, 0.5];
    let mut values = Vec::new();
    let mut valid = Vec::new();
    for i in 0..prime.phis.len() {
        for _ in &alphas {
            values.push(prime.values[i]);
            valid.push(prime.valid[i]);
        }
    }
    let sigma = RobustnessGrid {
        m: 6,
        kind: FieldKind::SigmaP,
        phis: prime.phis.clone(),
        alphas,
        values,
        valid,
        alpha_center: Some(0.0),
    };
    let ratio = ratio_map(&sigma, &prime).unwrap();
    let mut seen = 0;
    for i in 0..ratio.rows() {
        for j in 0..ratio.cols() {
            if let Some(v) = ratio.get(i, j) {
                assert!((v - 1.0).abs() < 1e-12);
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
    assert!(ratio.get(89, 0).is_none(), "zero denominator at phi = pi");
}
