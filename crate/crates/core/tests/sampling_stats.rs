mod common;

use common::*;
use qwork_core::detector::{
    protocol2_delta, protocol2_mixture, DetectorConfig, PositionDistribution,
};
use qwork_core::sampling::*;
use qwork_core::work::*;
use qwork_core::InitialState;

#[test]
fn tmp_mean_converges_over_seeds() {
    let p = nmr_forward();
    let state = InitialState::thermal(1.0).unwrap();
    let exact = tmp_distribution(&state, &p).unwrap();
    let mut outside = 0;
    for seed in 0..20 {
        let plan = ShotPlan::new(50_000, seed, SamplingProtocol::Tmp).unwrap();
        let s = sample_tmp(&state, &p, &plan).unwrap();
        let est = s.report.estimate("mean_w").unwrap();
        let se = s.report.standard_error("mean_w").unwrap();
        assert!((est - exact.mean()).abs() < 5.0 * se, "seed {seed}");
        if (est - exact.mean()).abs() > 2.0 * se {
            outside += 1;
        }
    }
    // Expected about one in twenty beyond two standard errors.
    assert!(outside <= 5);
}

#[test]
fn ramsey_shots_within_four_sigma() {
    let state = InitialState::thermal(0.7).unwrap();
    for (name, p) in test_models() {
        for lambda in [0.3, 1.1, 2.5] {
            let exact = two_time_correlation(&state, &p, &[lambda]).unwrap().values[0];
            let plan = ShotPlan::new(100_000, 17, SamplingProtocol::Ramsey).unwrap();
            let r = sample_ramsey(&state, &p, lambda, &plan).unwrap();
            for (key, target) in [("chi_re", exact.re), ("chi_im", exact.im)] {
                let est = r.estimate(key).unwrap();
                let se = r.standard_error(key).unwrap().max(1e-6);
                assert!((est - target).abs() < 4.0 * se, "{name} {lambda} {key}");
            }
        }
    }
}

#[test]
fn position_samples_pass_ks() {
    let p = hadamard_process();
    let cfg = DetectorConfig::new(1.0, 1.0, 0.4).unwrap();
    for state in [InitialState::thermal(1.0).unwrap(), plus_state()] {
        let m = protocol2_mixture(&state, &p, &cfg).unwrap();
        let plan = ShotPlan::new(100_000, 5, SamplingProtocol::Protocol2).unwrap();
        let s = sample_position(&state, &p, &cfg, &plan).unwrap();
        let sorted = s.sorted();
        let d = ks_statistic(&sorted, |x| m.cdf(x));
        assert!(d < ks_bound_99(sorted.len()), "D = {d}");
        let est = s.report.estimate("mean_dx").unwrap();
        let se = s.report.standard_error("mean_dx").unwrap();
        assert!((est - m.mean()).abs() < 4.0 * se);
    }
}

#[test]
fn sharp_pointer_samples_match_atoms() {
    let p = nmr_forward();
    let state = InitialState::thermal(1.0).unwrap();
    let cfg = DetectorConfig::new(1.0, 2.0, 0.1).unwrap();
    let atoms = protocol2_delta(&state, &p, &cfg).unwrap();
    let plan = ShotPlan::new(200_000, 3, SamplingProtocol::Protocol2).unwrap();
    let s =
        sample_position_distribution(&PositionDistribution::Delta(atoms.clone()), &plan).unwrap();
    let counts: Vec<u64> = atoms
        .atoms()
        .iter()
        .map(|a| s.samples.iter().filter(|&&x| x == a.w).count() as u64)
        .collect();
    assert_eq!(counts.iter().sum::<u64>(), plan.shots);
    let probs: Vec<f64> = atoms.atoms().iter().map(|a| a.weight).collect();
    assert!(chi_squared_test(&counts, &probs, 0.99).unwrap().pass);
}

#[test]
fn same_seed_same_shots() {
    let p = hadamard_process();
    let state = InitialState::thermal(1.0).unwrap();
    let plan = ShotPlan::new(10_000, 42, SamplingProtocol::Tmp).unwrap();
    let a = sample_tmp(&state, &p, &plan).unwrap();
    let b = sample_tmp(&state, &p, &plan).unwrap();
    assert_eq!(a.counts, b.counts);
    let other = ShotPlan::new(10_000, 43, SamplingProtocol::Tmp).unwrap();
    assert_ne!(sample_tmp(&state, &p, &other).unwrap().counts, a.counts);
}

#[test]
fn zero_shots_rejected() {
    assert!(ShotPlan::new(0, 1, SamplingProtocol::Tmp).is_err());
}

#[test]
fn ramsey_at_zero_lambda_reads_one() {
    let p = hadamard_process();
    let state = InitialState::thermal(1.0).unwrap();
    let plan = ShotPlan::new(10_000, 8, SamplingProtocol::Ramsey).unwrap();
    let r = sample_ramsey(&state, &p, 0.0, &plan).unwrap();
    assert_eq!(r.estimate("sigma_z"), Some(1.0));
}

#[test]
fn ramsey_symmetric_case_has_zero_sigma_y() {
    // Real symmetric process, thermal input: χ is real.
    let p = hadamard_process();
    let state = InitialState::thermal(0.4).unwrap();
    let exact = two_time_correlation(&state, &p, &[std::f64::consts::FRAC_PI_2]).unwrap();
    assert!(exact.values[0].im.abs() < 1e-14);
    let shots = 100_000;
    let plan = ShotPlan::new(shots, 21, SamplingProtocol::Ramsey).unwrap();
    let r = sample_ramsey(&state, &p, std::f64::consts::FRAC_PI_2, &plan).unwrap();
    assert!(r.estimate("sigma_y").unwrap().abs() < 4.0 / (shots as f64).sqrt());
}

#[test]
fn ramsey_thermal_hadamard_half() {
    let p = hadamard_process();
    let state = InitialState::thermal(1.0).unwrap();
    // Oracle: P_TMP for the thermal Hadamard is 1/2 per final level.
    let z = 2.0 * 1.0_f64.cosh();
    let (pd, pu) = ((1.0_f64).exp() / z, (-1.0_f64).exp() / z);
    let l = 0.5_f64;
    let chi = num_complex::Complex64::new(0.5, 0.0)
        * (pd * (num_complex::Complex64::i() * 2.0 * l).exp()
            + (pd + pu)
            + pu * (-num_complex::Complex64::i() * 2.0 * l).exp());
    let plan = ShotPlan::new(100_000, 12, SamplingProtocol::Ramsey).unwrap();
    let r = sample_ramsey(&state, &p, l, &plan).unwrap();
    for (key, target) in [("chi_re", chi.re), ("chi_im", chi.im)] {
        let se = r.standard_error(key).unwrap();
        assert!(
            (r.estimate(key).unwrap() - target).abs() < 4.0 * se,
            "{key}"
        );
    }
}

#[test]
fn standard_error_halves_with_four_times_the_shots() {
    let p = nmr_forward();
    let state = InitialState::thermal(0.5).unwrap();
    let se = |shots| {
        let plan = ShotPlan::new(shots, 77, SamplingProtocol::Tmp).unwrap();
        sample_tmp(&state, &p, &plan)
            .unwrap()
            .report
            .standard_error("mean_w")
            .unwrap()
    };
    let (a, b, c) = (se(25_000), se(50_000), se(100_000));
    assert!((a / b / std::f64::consts::SQRT_2 - 1.0).abs() < 0.05);
    assert!((b / c / std::f64::consts::SQRT_2 - 1.0).abs() < 0.05);
}
