use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use qrws_core::coin::{reduce_angle, zeta_of_phi};
use qrws_core::walk::{final_state, run_symmetric};
use qrws_core::{build_coin, run, CoinSpec, CurveRelation, RunConfig, WalkState};

fn angle() -> impl Strategy<Value = f64> {
    0.0..TAU
}

fn relation() -> impl Strategy<Value = CurveRelation> {
    prop_oneof![
        Just(CurveRelation::Linear),
        Just(CurveRelation::Constant),
        (-1.5..1.0f64).prop_map(|alpha| CurveRelation::Sinusoidal { alpha }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn coin_is_unitary(m in 2usize..12, phi in angle(), zeta in angle()) {
        let c = build_coin(&CoinSpec::new(m, phi, zeta).unwrap());
        prop_assert!(c.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn uniform_vector_is_eigenvector(m in 2usize..10, phi in angle(), zeta in angle()) {
        let c = build_coin(&CoinSpec::new(m, phi, zeta).unwrap());
        let chi = vec![Complex64::new(1.0 / (m as f64).sqrt(), 0.0); m];
        let out = c.mul_vec(&chi);
        let lambda = Complex64::from_polar(1.0, zeta + phi);
        for (o, x) in out.iter().zip(&chi) {
            prop_assert!((o - lambda * x).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_is_conserved(m in 2usize..8, phi in angle(), zeta in angle(), k in 1usize..30) {
        let state = final_state(&RunConfig::new(m, phi, zeta).with_iterations(k)).unwrap();
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shift_is_an_involution(
        (m, raw) in (2usize..7).prop_flat_map(|m| {
            (Just(m), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m << m))
        })
    ) {
        let norm = raw.iter().map(|(re, im)| re * re + im * im).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im) / norm).collect();
        let mut state = WalkState::from_amplitudes(m, amps.clone()).unwrap();
        state.apply_shift();
        prop_assert_ne!(state.amplitudes(), &amps[..]);
        state.apply_shift();
        prop_assert_eq!(state.amplitudes(), &amps[..]);
    }

    #[test]
    fn conjugate_angles_give_equal_probability(m in 2usize..9, phi in angle(), zeta in angle()) {
        let a = run_symmetric(&RunConfig::new(m, phi, zeta)).unwrap();
        let b = run_symmetric(&RunConfig::new(m, TAU - phi, TAU - zeta)).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn probability_does_not_depend_on_target(m in 2usize..7, phi in angle(), zeta in angle(), t in any::<usize>()) {
        let target = t % (1 << m);
        let a = run(&RunConfig::new(m, phi, zeta)).unwrap();
        let b = run(&RunConfig::new(m, phi, zeta).with_target(target)).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn engines_agree(m in 2usize..9, phi in angle(), zeta in angle()) {
        let config = RunConfig::new(m, phi, zeta);
        let a = run(&config).unwrap();
        let b = run_symmetric(&config).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn curves_are_mirror_symmetric(rel in relation(), phi in angle()) {
        let z = zeta_of_phi(rel, phi);
        let mirrored = zeta_of_phi(rel, TAU - phi);
        let expected = reduce_angle(TAU - z);
        let diff = (mirrored - expected).abs();
        prop_assert!(diff < 1e-9 || (TAU - diff) < 1e-9, "{} vs {}", mirrored, expected);
    }

    #[test]
    fn sinusoidal_zero_is_linear(phi in angle()) {
        prop_assert_eq!(
            zeta_of_phi(CurveRelation::Sinusoidal { alpha: 0.0 }, phi),
            zeta_of_phi(CurveRelation::Linear, phi)
        );
    }
}

#[test]
fn grover_point_on_both_engines() {
    for m in 4..=8 {
        let config = RunConfig::new(m, PI, PI);
        assert!((run(&config).unwrap() - run_symmetric(&config).unwrap()).abs() < 1e-12);
    }
}
