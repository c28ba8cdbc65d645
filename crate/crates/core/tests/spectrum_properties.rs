use proptest::prelude::*;
use topoquant::integrate::integrate_reduced;
use topoquant::spectrum::{
    branch_defect, canonical_energy, q0_from_c, spectrum_table, topological_number,
    verify_consistency, OscillatorParams,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn branch_identity_holds(log_c in -3.0f64..6.0, log_a in -3.0f64..3.0) {
        let (c, a) = (10f64.powf(log_c), 10f64.powf(log_a));
        let q0 = q0_from_c(c, a).unwrap();
        prop_assert!(q0 < 0.0);
        prop_assert!(branch_defect(c, a, q0) <= 1e-12);
    }

    #[test]
    fn canonical_levels_are_reproduced(
        n in 1i64..=20,
        b in 0.25f64..4.0,
        hbar in 0.25f64..4.0,
        k in 0.25f64..4.0,
        m in 0.25f64..4.0,
    ) {
        // b q0 / (q0^2 - a^2) has condition number ~ a C in q0, so the 1e-10 bound
        // is only attainable in double precision while n a C stays well below 1e6.
        let p = OscillatorParams::new(m, k, b, hbar).unwrap();
        let e = canonical_energy(n, &p).unwrap();
        prop_assert!(verify_consistency(&p, e).unwrap() <= 1e-10);
        let q0 = topoquant::spectrum::q0_from_energy(&p, e).unwrap();
        let t = topological_number(b, k, e, q0).unwrap();
        prop_assert!((t - n as f64).abs() <= 1e-10, "{}", t);
    }

    #[test]
    fn closed_form_agrees_with_quadrature(
        k in 0.1f64..5.0,
        e in 0.1f64..5.0,
        b in 0.1f64..5.0,
        ratio in 0.05f64..0.95,
    ) {
        let a = (2.0 * e / k).sqrt();
        let q0 = ratio * a;
        let closed = topological_number(b, k, e, q0).unwrap();
        let quad = integrate_reduced(k, e, b, q0, 1e-10).unwrap().value;
        prop_assert!((closed - quad).abs() <= 1e-10f64.max(1e-10 * closed.abs()));
    }

    #[test]
    fn table_energies_depend_only_on_hbar_omega(b1 in 0.1f64..10.0, b2 in 0.1f64..10.0, hbar in 0.1f64..3.0) {
        let t1 = spectrum_table(&OscillatorParams::new(1.0, 1.0, b1, hbar).unwrap(), 6).unwrap();
        let t2 = spectrum_table(&OscillatorParams::new(1.0, 1.0, b2, hbar).unwrap(), 6).unwrap();
        for (r1, r2) in t1.iter().zip(&t2) {
            prop_assert_eq!(r1.energy, r2.energy);
        }
    }
}

#[test]
fn residual_grows_with_conditioning() {
    // n = 137, b = 0.05: a C ~ 1.5e6, one ulp in q0 moves the result by ~1e-8
    let p = OscillatorParams::new(0.05, 0.05, 0.05, 13.884719451248325).unwrap();
    let e = canonical_energy(137, &p).unwrap();
    let r = verify_consistency(&p, e).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn classical_limit() {
    let q0 = q0_from_c(1e6, 1.0).unwrap();
    assert!((q0.abs() - 1.0).abs() <= 1e-5);
}

#[test]
fn zero_energy_limit_at_fixed_c() {
    for c in [0.1, 1.0, 10.0] {
        for a in [1e-3, 1e-6] {
            let q0 = q0_from_c(c, a).unwrap();
            assert!(q0.abs() <= a * a * c / 2.0 + 1e-15, "c={c} a={a}: {q0}");
        }
    }
}
