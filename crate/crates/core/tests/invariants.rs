mod common;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qwork_core::detector::{protocol1_g, protocol2_mixture, DetectorConfig};
use qwork_core::quantum::*;
use qwork_core::ramsey::{build_m1_m2, build_m_lambda, compose_m1_m2, ramsey_circuit, run_ramsey};
use qwork_core::work::*;
use qwork_core::InitialState;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectral_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, n);
        let s = spectral_decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
        prop_assert!(max_abs(&(s.reconstruct() - &h)) < 1e-11);
        prop_assert!(unitarity_defect(s.basis()) < 1e-12);
        let u = s.propagator(0.8);
        prop_assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn tmp_distribution_is_a_probability(seed in any::<u64>(), beta in 0.05f64..3.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let d = tmp_distribution(&InitialState::thermal(beta).unwrap(), &p).unwrap();
        prop_assert!((d.total_weight() - 1.0).abs() < 1e-12);
        prop_assert!(d.min_weight() >= 0.0);
        prop_assert!(d.atoms().windows(2).all(|a| a[0].w < a[1].w));
    }

    #[test]
    fn quasi_distribution_is_normalised_and_real(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let q = quasi_distribution(&s, &p).unwrap();
        prop_assert!((q.total_weight() - 1.0).abs() < 1e-12);
        let lambdas = [0.0, 0.3, 1.7, -2.2];
        let g = g_lambda(&s, &p, &lambdas).unwrap();
        let ft = CharacteristicFunctionSamples::of_distribution(&q, &lambdas);
        prop_assert!(g.max_deviation(&ft) < 1e-12);
    }

    #[test]
    fn tmp_characteristic_matches_atoms(seed in any::<u64>(), lambda in -5.0f64..5.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let d = tmp_distribution(&s, &p).unwrap();
        let chi = characteristic_function_tmp(&s, &p, &[lambda]).unwrap();
        prop_assert!((chi.values[0] - d.fourier(lambda)).norm() < 1e-12);
        prop_assert!(chi.values[0].norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn moment_identities_hold(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let m = moment_identities_check(&s, &p).unwrap();
        prop_assert!(m.max_delta() < 1e-10, "{m:?}");
        prop_assert!((m.fd_first - m.quasi_first).abs() < 1e-6);
        prop_assert!((m.fd_second - m.quasi_second).abs() < 1e-5);
    }

    #[test]
    fn ramsey_factorisation_and_unitarity(seed in any::<u64>(), lambda in -4.0f64..4.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let m = build_m_lambda(&p, lambda);
        let (m1, m2) = build_m1_m2(&p, lambda);
        prop_assert!(max_abs(&(compose_m1_m2(&m1, &m2) - &m)) < 1e-12);
        prop_assert!(unitarity_defect(&m) < 1e-12);
        prop_assert!(unitarity_defect(&m1) < 1e-12);
        prop_assert!(unitarity_defect(&ramsey_circuit(&p, lambda)) < 1e-12);
    }

    #[test]
    fn ramsey_reproduces_two_time_correlation(seed in any::<u64>(), lambda in -4.0f64..4.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let o = run_ramsey(&s, &p, &[lambda]).unwrap().remove(0);
        let exact = two_time_correlation(&s, &p, &[lambda]).unwrap();
        prop_assert!((o.chi - exact.values[0]).norm() < 1e-12);
        prop_assert!((o.rho_qubit.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn thermal_inputs_collapse_quasi_to_tmp(seed in any::<u64>(), beta in 0.05f64..3.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::thermal(beta).unwrap();
        let lambdas = [0.4, 1.3, 2.9];
        let g = g_lambda(&s, &p, &lambdas).unwrap();
        let chi = characteristic_function_tmp(&s, &p, &lambdas).unwrap();
        prop_assert!(g.max_deviation(&chi) < 1e-12);
    }

    #[test]
    fn jarzynski_holds_for_thermal_inputs(seed in any::<u64>(), beta in 0.1f64..2.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let d = tmp_distribution(&InitialState::thermal(beta).unwrap(), &p).unwrap();
        let df = delta_f(p.h0(), p.ht(), beta).unwrap();
        let rep = jarzynski_check(&d, beta, df).unwrap();
        prop_assert!(rep.relative_deviation < 1e-10);
    }

    #[test]
    fn protocol1_matches_g_lambda(seed in any::<u64>(), lambda in 0.1f64..3.0, sigma in 0.1f64..2.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let cfg = DetectorConfig::new(lambda, 1.5, sigma).unwrap();
        let grid = [0.0, 0.5, 1.1, 2.3];
        let g = protocol1_g(&s, &p, &cfg, &grid).unwrap();
        let exact = g_lambda(&s, &p, &grid).unwrap();
        prop_assert!(g.max_deviation(&exact) < 1e-12);
    }

    #[test]
    fn pointer_density_has_unit_mass(seed in any::<u64>(), sigma in 0.05f64..3.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let s = InitialState::density(random_density(&mut r, p.dim())).unwrap();
        let cfg = DetectorConfig::new(0.8, 1.0, sigma).unwrap();
        let m = protocol2_mixture(&s, &p, &cfg).unwrap();
        prop_assert!((m.total_weight() - 1.0).abs() < 1e-12);
        let (lo, hi) = m.center_range();
        let (a, b) = (lo - 10.0 * sigma, hi + 10.0 * sigma);
        prop_assert!((m.cdf(b) - m.cdf(a) - 1.0).abs() < 1e-12);
        for k in 0..=50 {
            let x = a + (b - a) * k as f64 / 50.0;
            prop_assert!(m.density(x) >= -1e-12);
        }
    }

    #[test]
    fn reversed_process_mirrors_crooks(seed in any::<u64>(), beta in 0.2f64..2.0) {
        let mut r = rng(seed);
        let p = random_process(&mut r, 0.0);
        let back = p.reversed().unwrap();
        let f = tmp_distribution(&InitialState::thermal(beta).unwrap(), &p).unwrap();
        let b = tmp_distribution(&InitialState::thermal(beta).unwrap(), &back).unwrap();
        let rep = crooks_check(&f, &b, beta).unwrap();
        let df = delta_f(p.h0(), p.ht(), beta).unwrap();
        prop_assert!(rep.max_deviation_from(beta, df) < 1e-8);
    }
}
