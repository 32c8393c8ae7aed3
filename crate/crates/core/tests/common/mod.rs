//! Random instances and fixed test models shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use qwork_core::models::{CollectiveSpinModel, NmrModel, DEFAULT_STEPS_PER_SEGMENT};
use qwork_core::quantum::*;
use qwork_core::work::{quasi_support, tmp_support};
use qwork_core::{InitialState, Process};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    Operator::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    let g = gaussian_matrix(rng, n);
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    expm_hermitian(&random_hermitian(rng, n), 1.0).unwrap()
}

/// Hermitian matrix with eigenvalues in `[−2, 2]` at least `min_gap` apart
/// and a random eigenbasis.
pub fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Operator {
    loop {
        let mut e: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        e.sort_by(f64::total_cmp);
        if e.windows(2).all(|p| p[1] - p[0] >= min_gap) {
            let v = random_unitary(rng, n);
            return &v * diag(&e) * v.adjoint();
        }
    }
}

pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> Operator {
    let g = gaussian_matrix(rng, n);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn min_gap(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min)
}

/// Random process on 2–4 levels whose work supports are separated by at
/// least `support_gap`, so that inversion on the support is well posed.
pub fn random_process(rng: &mut ChaCha8Rng, support_gap: f64) -> Process {
    loop {
        let n = rng.random_range(2..=4);
        let p = Process::new(
            random_hamiltonian(rng, n, 0.2),
            random_hamiltonian(rng, n, 0.2),
            random_unitary(rng, n),
        )
        .unwrap();
        if min_gap(&tmp_support(&p)) >= support_gap && min_gap(&quasi_support(&p)) >= support_gap {
            return p;
        }
    }
}

pub fn hadamard_process() -> Process {
    Process::new(pauli_z(), pauli_z(), hadamard()).unwrap()
}

pub fn plus_state() -> InitialState {
    InitialState::pure(Ket::from_vec(vec![
        c(FRAC_1_SQRT_2, 0.0),
        c(FRAC_1_SQRT_2, 0.0),
    ]))
    .unwrap()
}

pub fn nmr_forward() -> Process {
    NmrModel::default()
        .process(DEFAULT_STEPS_PER_SEGMENT)
        .unwrap()
}

pub fn nmr_backward() -> Process {
    NmrModel::default()
        .reversed()
        .process(DEFAULT_STEPS_PER_SEGMENT)
        .unwrap()
}

pub fn collective_spin(j: f64) -> CollectiveSpinModel {
    CollectiveSpinModel {
        gamma_b: 1.0,
        alpha0: 0.0,
        alpha_t: PI / 2.0,
        j,
        duration: 2.0,
    }
}

/// Named fixed models used across the checks.
pub fn test_models() -> Vec<(&'static str, Process)> {
    vec![
        ("hadamard", hadamard_process()),
        ("nmr-forward", nmr_forward()),
        ("nmr-backward", nmr_backward()),
        (
            "spin-1-ramp",
            collective_spin(1.0)
                .process(DEFAULT_STEPS_PER_SEGMENT)
                .unwrap(),
        ),
        (
            "spin-3/2-ramp",
            collective_spin(1.5)
                .process(DEFAULT_STEPS_PER_SEGMENT)
                .unwrap(),
        ),
        (
            "spin-1/2-quench",
            collective_spin(0.5).sudden_process().unwrap(),
        ),
        (
            "z-to-x-quench",
            Process::sudden(pauli_z(), pauli_x()).unwrap(),
        ),
    ]
}
