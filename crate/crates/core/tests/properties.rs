use nalgebra::Vector4;
use num_complex::Complex64;
use proptest::prelude::*;

use nv_seesaw::dynamics::{
    abdf, build_heff, concurrence_pure, evolve_closed_form, evolve_numeric, wootters_concurrence, BellAmplitudes,
    EvolutionMode,
};
use nv_seesaw::harness::standard_mapping;
use nv_seesaw::mechanics::{self, CantileverSpec, MODE_BETAS};
use nv_seesaw::spin_model::{coupling_enhancement_ratio, effective_coupling_strength};
use nv_seesaw::PhysicalConstants;

const C: PhysicalConstants = PhysicalConstants::CODATA;

fn state() -> impl Strategy<Value = BellAmplitudes> {
    prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))
        .prop_filter("non-zero", |z| z.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|z| {
            let norm = z.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            BellAmplitudes(z.map(|(a, b)| Complex64::new(a / norm, b / norm)))
        })
}

/// `(α, Δh)` away from the `αΔh = 1` resonance of spin 1.
fn regime() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..4.0, 0.0f64..0.9).prop_filter("dispersive", |(a, d)| (a * d - 1.0).abs() > 0.05)
}

fn spec() -> impl Strategy<Value = CantileverSpec> {
    (1e-6f64..10e-6, 10e-9f64..100e-9, 50e9f64..300e9).prop_map(|(length, t, young)| CantileverSpec {
        length,
        substrate_thickness: t,
        film_thickness: t / 3.0,
        young_modulus: young,
        rest_gap: 1e-3,
        ..CantileverSpec::reference()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torque_deflection_is_linear(spec in spec(), b in 0.0f64..0.05, k in 0.0f64..10.0) {
        let one = mechanics::torque_deflection(&spec, b, &C);
        let scaled = mechanics::torque_deflection(&spec, k * b, &C);
        prop_assert!((scaled - k * one).abs() <= 1e-12 * (k * one).abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn gaps_sum_to_twice_rest_gap(spec in spec(), b in 0.0f64..0.05) {
        let r = mechanics::deflection_torque(&spec, b, &C).unwrap();
        prop_assert!((r.h1 + r.h2 - 2.0 * spec.rest_gap).abs() <= 1e-12 * spec.rest_gap);
        prop_assert!(r.h1 > 0.0);
    }

    #[test]
    fn frequency_ratios_follow_mode_constants(spec in spec()) {
        let f1 = mechanics::resonance_frequency(&spec, 1).unwrap();
        let f2 = mechanics::resonance_frequency(&spec, 2).unwrap();
        let f3 = mechanics::resonance_frequency(&spec, 3).unwrap();
        let r = |i: usize| (MODE_BETAS[i] / MODE_BETAS[0]).powi(2);
        prop_assert!((f2 / f1 - r(1)).abs() < 1e-12 * r(1));
        prop_assert!((f3 / f1 - r(2)).abs() < 1e-12 * r(2));
    }

    #[test]
    fn coupling_ratio_formula((alpha, dh) in regime()) {
        let j = effective_coupling_strength(&standard_mapping(alpha, dh, 1.0).unwrap());
        let j0 = effective_coupling_strength(&standard_mapping(alpha, 0.0, 1.0).unwrap());
        let expected = coupling_enhancement_ratio(&standard_mapping(alpha, dh, 1.0).unwrap());
        prop_assert!((j / j0 - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn abdf_identity_is_exact((alpha, dh) in regime(), n in 0.0f64..5.0) {
        let c = abdf(&standard_mapping(alpha, dh, n).unwrap());
        prop_assert_eq!(c.b * (2.0 * n + 1.0) + c.a, 0.0);
    }

    #[test]
    fn unitary_routes_preserve_norm(s in state(), (alpha, dh) in regime(), t_us in 0.0f64..30.0) {
        let set = standard_mapping(alpha, dh, 1.0).unwrap();
        let t = t_us * 1e-6;
        let closed = evolve_closed_form(&s, &abdf(&set), t, EvolutionMode::Unitary).unwrap();
        prop_assert!((closed.norm_sqr() - 1.0).abs() < 1e-9);
        let num = evolve_numeric(&s, &build_heff(&set).unwrap(), t.min(2e-6), 1e-9).unwrap();
        prop_assert!((num.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_blocks_do_not_mix(s in state(), (alpha, dh) in regime()) {
        let set = standard_mapping(alpha, dh, 1.0).unwrap();
        let out = evolve_numeric(&s, &build_heff(&set).unwrap(), 2e-6, 1e-9).unwrap();
        prop_assert!((out.phi_weight() - s.phi_weight()).abs() < 1e-9);
        prop_assert!((out.psi_weight() - s.psi_weight()).abs() < 1e-9);
    }

    #[test]
    fn concurrence_in_range_and_matches_oracle(s in state()) {
        let c = concurrence_pure(&s);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&c));
        prop_assert!((c - wootters_concurrence(&s)).abs() < 1e-9);
    }

    #[test]
    fn bell_basis_round_trip(s in state()) {
        prop_assert!(BellAmplitudes::from_product(&s.to_product()).max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn spin_relabelling((alpha, dh) in regime(), s in state()) {
        let set = standard_mapping(alpha, dh, 1.0).unwrap();
        prop_assert_eq!(set.swapped().swapped(), set);
        // exchanging spins maps |eg⟩ ↔ |ge⟩, i.e. ψ⁻ → −ψ⁻
        let p = s.to_product();
        let exchanged = BellAmplitudes::from_product(&Vector4::new(p[0], p[2], p[1], p[3]));
        let t = 1.5e-6;
        let a = evolve_numeric(&s, &build_heff(&set).unwrap(), t, 1e-9).unwrap();
        let b = evolve_numeric(&exchanged, &build_heff(&set.swapped()).unwrap(), t, 1e-9).unwrap();
        prop_assert!((concurrence_pure(&a) - concurrence_pure(&b)).abs() < 1e-9);
    }
}
