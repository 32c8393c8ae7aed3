//! Two-measurement distribution, quasi-probability distribution and the
//! associated characteristic functions.
//!
//! Distributions are assembled from transition amplitudes in the energy
//! eigenbases; characteristic functions are evaluated as operator traces.
//! The two routes are independent and check each other.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{merge_atoms, merge_tol_for, Atom, DistributionKind, WorkDistribution};
use crate::error::{Error, Result};
use crate::process::Process;
use crate::quantum::Operator;
use crate::state::InitialState;

/// Largest imaginary residue tolerated on a merged quasi-probability weight.
pub const QUASI_IMAG_TOL: f64 = 1e-10;

/// Samples of a characteristic function on a grid of λ values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFunctionSamples {
    pub lambdas: Vec<f64>,
    pub values: Vec<C64>,
}

impl CharacteristicFunctionSamples {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.lambdas
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Largest pointwise distance to another sample set on the same grid.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "grids differ in length");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Samples `Σ_k weight_k e^{iλ w_k}` of a distribution.
    pub fn of_distribution(dist: &WorkDistribution, lambdas: &[f64]) -> Self {
        CharacteristicFunctionSamples {
            lambdas: lambdas.to_vec(),
            values: lambdas.iter().map(|&l| dist.fourier(l)).collect(),
        }
    }

    /// Checks the normalisation `χ(0) = 1` wherever λ = 0 is sampled.
    pub fn check_normalization(&self, tol: f64) -> Result<()> {
        for (l, v) in self.iter() {
            if l == 0.0 && (v - C64::new(1.0, 0.0)).norm() > tol {
                return Err(Error::NumericalCheck(format!(
                    "characteristic function at lambda = 0 is {v}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Level populations and conditional transition probabilities.
#[derive(Debug, Clone)]
pub struct TransitionData {
    /// `P_i = Tr[Π_i ρ]` per initial level.
    pub p_i: Vec<f64>,
    /// `P_{i→j}`, rows indexed by initial level.
    pub p_ij: Vec<Vec<f64>>,
    /// Joint weights `P_i P_{i→j}` computed without dividing by `P_i`.
    pub joint: Vec<Vec<f64>>,
    /// `U_{ji} = ⟨ε_j^T|U|ε_i^0⟩` in the eigenbases of the process.
    pub u_elements: Operator,
}

fn columns_by_level(level_of: &[usize], levels: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); levels];
    for (col, &l) in level_of.iter().enumerate() {
        out[l].push(col);
    }
    out
}

pub fn transition_data(state: &InitialState, process: &Process) -> Result<TransitionData> {
    let rho = state.energy_basis_matrix(process)?;
    let amp = process.transition_amplitudes();
    let sd0 = process.initial_spectrum();
    let sdt = process.final_spectrum();
    let init_cols = columns_by_level(sd0.level_of(), sd0.levels());
    let fin_cols = columns_by_level(sdt.level_of(), sdt.levels());

    let mut p_i = Vec::with_capacity(init_cols.len());
    let mut p_ij = Vec::with_capacity(init_cols.len());
    let mut joint = Vec::with_capacity(init_cols.len());
    for si in &init_cols {
        let pop: f64 = si.iter().map(|&a| rho[(a, a)].re).sum();
        let mut row_joint = Vec::with_capacity(fin_cols.len());
        let mut row_uniform = Vec::with_capacity(fin_cols.len());
        for tj in &fin_cols {
            let mut acc = C64::new(0.0, 0.0);
            let mut uniform = 0.0;
            for &b in tj {
                for &a in si {
                    uniform += amp[(b, a)].norm_sqr();
                    for &a2 in si {
                        acc += amp[(b, a)] * rho[(a, a2)] * amp[(b, a2)].conj();
                    }
                }
            }
            row_joint.push(acc.re);
            row_uniform.push(uniform / si.len() as f64);
        }
        let row = if pop > 0.0 {
            row_joint.iter().map(|j| j / pop).collect()
        } else {
            row_uniform
        };
        p_i.push(pop);
        p_ij.push(row);
        joint.push(row_joint);
    }
    Ok(TransitionData {
        p_i,
        p_ij,
        joint,
        u_elements: amp,
    })
}

/// Merge tolerance used for the work atoms of a process.
pub fn default_merge_tol(process: &Process) -> f64 {
    merge_tol_for(
        process
            .initial_spectrum()
            .energies
            .iter()
            .chain(&process.final_spectrum().energies),
    )
}

/// Two-measurement work distribution: atoms at `ε_j^T − ε_i^0` with weights
/// `P_i P_{i→j}`.
pub fn tmp_distribution(state: &InitialState, process: &Process) -> Result<WorkDistribution> {
    let data = transition_data(state, process)?;
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let mut atoms = Vec::with_capacity(e0.len() * et.len());
    for (i, row) in data.joint.iter().enumerate() {
        for (j, &weight) in row.iter().enumerate() {
            atoms.push(Atom {
                w: et[j] - e0[i],
                weight,
            });
        }
    }
    WorkDistribution::new(
        atoms,
        DistributionKind::Probability,
        default_merge_tol(process),
    )
}

/// Quasi-probability distribution: atoms at `ε_j^T − (ε_i^0 + ε_k^0)/2` with
/// weights `Re[ρ_{ik} U_{ji} U*_{jk}]`.
pub fn quasi_distribution(state: &InitialState, process: &Process) -> Result<WorkDistribution> {
    let rho = state.energy_basis_matrix(process)?;
    let amp = process.transition_amplitudes();
    let e0 = process.initial_spectrum().basis_energies();
    let et = process.final_spectrum().basis_energies();
    let n = process.dim();
    let mut contributions = Vec::with_capacity(n * n * n);
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                let weight = rho[(i, k)] * amp[(j, i)] * amp[(j, k)].conj();
                contributions.push((et[j] - 0.5 * (e0[i] + e0[k]), weight));
            }
        }
    }
    WorkDistribution::from_complex_contributions(
        contributions,
        DistributionKind::QuasiProbability,
        default_merge_tol(process),
        QUASI_IMAG_TOL,
    )
}

fn evaluate<F>(lambdas: &[f64], f: F) -> CharacteristicFunctionSamples
where
    F: Fn(f64) -> C64 + Sync,
{
    CharacteristicFunctionSamples {
        lambdas: lambdas.to_vec(),
        values: lambdas.par_iter().map(|&l| f(l)).collect(),
    }
}

/// `Tr[U† e^{iλH_T} U e^{−iλH_0} ρ]` without projecting ρ.
///
/// For states diagonal in the initial energy basis this is the
/// characteristic function of the two-measurement distribution; otherwise it
/// is the general complex quantity read out by the Ramsey scheme.
pub fn two_time_correlation(
    state: &InitialState,
    process: &Process,
    lambdas: &[f64],
) -> Result<CharacteristicFunctionSamples> {
    let rho = state.to_density(process)?;
    Ok(correlation_for_density(&rho, process, lambdas))
}

fn correlation_for_density(
    rho: &Operator,
    process: &Process,
    lambdas: &[f64],
) -> CharacteristicFunctionSamples {
    let u = process.u();
    let u_dag = u.adjoint();
    evaluate(lambdas, |l| {
        let fwd = process.final_spectrum().propagator(-l);
        let back = process.initial_spectrum().propagator(l);
        (&u_dag * fwd * u * back * rho).trace()
    })
}

/// Characteristic function of the two-measurement distribution,
/// `Tr[U† e^{iλH_T} U e^{−iλH_0} ρ̃]` with `ρ̃ = Σ_i Π_i ρ Π_i`.
pub fn characteristic_function_tmp(
    state: &InitialState,
    process: &Process,
    lambdas: &[f64],
) -> Result<CharacteristicFunctionSamples> {
    let rho = state.to_density(process)?;
    let n = process.dim();
    let mut projected = Operator::zeros(n, n);
    for p in &process.initial_spectrum().projectors {
        projected += p * &rho * p;
    }
    Ok(correlation_for_density(&projected, process, lambdas))
}

/// Detector-phase characteristic function
/// `Tr[e^{iλH_T/2} U e^{−iλH_0/2} ρ e^{−iλH_0/2} U† e^{iλH_T/2}]`.
///
/// No projection of ρ: initial coherences are retained.
pub fn g_lambda(
    state: &InitialState,
    process: &Process,
    lambdas: &[f64],
) -> Result<CharacteristicFunctionSamples> {
    let rho = state.to_density(process)?;
    let u = process.u();
    let u_dag = u.adjoint();
    Ok(evaluate(lambdas, |l| {
        let fin_half = process.final_spectrum().propagator(-0.5 * l);
        let init_half = process.initial_spectrum().propagator(0.5 * l);
        let left = &fin_half * u * &init_half;
        let right = &init_half * &u_dag * &fin_half;
        (left * &rho * right).trace()
    }))
}

fn dedup_sorted(values: Vec<f64>, tol: f64) -> Vec<f64> {
    merge_atoms(
        values.into_iter().map(|v| (v, ())).collect(),
        tol,
        |_, _| (),
    )
    .into_iter()
    .map(|(v, _)| v)
    .collect()
}

/// All `ε_j^T − ε_i^0`, deduplicated.
pub fn tmp_support(process: &Process) -> Vec<f64> {
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let values = et
        .iter()
        .flat_map(|ej| e0.iter().map(move |ei| ej - ei))
        .collect();
    dedup_sorted(values, default_merge_tol(process))
}

/// All `ε_j^T − (ε_i^0 + ε_k^0)/2`, deduplicated.
pub fn quasi_support(process: &Process) -> Vec<f64> {
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let mut values = Vec::with_capacity(et.len() * e0.len() * e0.len());
    for ej in et {
        for ei in e0 {
            for ek in e0 {
                values.push(ej - 0.5 * (ei + ek));
            }
        }
    }
    dedup_sorted(values, default_merge_tol(process))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus() -> InitialState {
        InitialState::pure(Ket::from_vec(vec![
            c(FRAC_1_SQRT_2, 0.),
            c(FRAC_1_SQRT_2, 0.),
        ]))
        .unwrap()
    }

    fn eigen_minus() -> InitialState {
        InitialState::density(diag(&[0.0, 1.0])).unwrap()
    }

    fn eigen_plus() -> InitialState {
        InitialState::density(diag(&[1.0, 0.0])).unwrap()
    }

    /// Brute-force enumeration of the two-measurement sum for the thermal
    /// Hadamard model, by hand: levels ε = ±1 with populations
    /// e^{∓1}/(2cosh 1) and all transition probabilities 1/2.
    fn thermal_hadamard_oracle() -> Vec<(f64, f64)> {
        let ch = 1f64.cosh();
        vec![
            (-2.0, (-1f64).exp() / (4.0 * ch)),
            (0.0, 0.5),
            (2.0, 1f64.exp() / (4.0 * ch)),
        ]
    }

    fn assert_atoms(d: &WorkDistribution, expect: &[(f64, f64)], tol: f64) {
        assert_eq!(d.len(), expect.len(), "atoms: {:?}", d.atoms());
        for (a, (w, p)) in d.atoms().iter().zip(expect) {
            assert!((a.w - w).abs() < tol, "{} vs {}", a.w, w);
            assert!((a.weight - p).abs() < tol, "{} vs {}", a.weight, p);
        }
    }

    #[test]
    fn undriven_eigenstate_does_no_work() {
        let p = Process::new(pauli_z(), pauli_z(), identity(2)).unwrap();
        let d = tmp_distribution(&eigen_plus(), &p).unwrap();
        assert_atoms(&d, &[(0.0, 1.0)], 1e-15);
    }

    #[test]
    fn deterministic_flip() {
        let p = Process::new(pauli_z(), pauli_z(), pauli_x()).unwrap();
        let d = tmp_distribution(&eigen_minus(), &p).unwrap();
        assert_atoms(&d, &[(2.0, 1.0)], 1e-15);
        let chi = characteristic_function_tmp(&eigen_minus(), &p, &[0.0, 0.3, 1.1]).unwrap();
        for (l, v) in chi.iter() {
            assert!((v - C64::from_polar(1.0, 2.0 * l)).norm() < 1e-14);
        }
    }

    #[test]
    fn thermal_hadamard_distribution() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let st = InitialState::thermal(1.0).unwrap();
        let d = tmp_distribution(&st, &p).unwrap();
        assert_atoms(&d, &thermal_hadamard_oracle(), 1e-14);

        let lambdas = [0.0, PI / 4.0, 1.3];
        let chi = characteristic_function_tmp(&st, &p, &lambdas).unwrap();
        for (l, v) in chi.iter() {
            let oracle: C64 = thermal_hadamard_oracle()
                .iter()
                .map(|(w, p)| C64::from_polar(*p, l * w))
                .sum();
            assert!((v - oracle).norm() < 1e-14);
        }
        chi.check_normalization(1e-10).unwrap();
    }

    #[test]
    fn transition_rows_are_stochastic() {
        let p = Process::new(pauli_z(), pauli_x(), hadamard()).unwrap();
        let data = transition_data(&plus(), &p).unwrap();
        for (i, row) in data.p_ij.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for (j, pij) in row.iter().enumerate() {
                assert!((pij - data.u_elements[(j, i)].norm_sqr()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quasi_distribution_of_plus_state() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let q = quasi_distribution(&plus(), &p).unwrap();
        // Brute-force triple sum, worked out by hand.
        let expect = [
            (-2.0, 0.25),
            (-1.0, -0.5),
            (0.0, 0.5),
            (1.0, 0.5),
            (2.0, 0.25),
        ];
        assert_atoms(&q, &expect, 1e-14);
        assert!((q.mean() - 1.0).abs() < 1e-14);
        assert_eq!(q.kind(), DistributionKind::QuasiProbability);
    }

    #[test]
    fn quasi_with_identity_is_trivial() {
        let p = Process::new(pauli_z(), pauli_z(), identity(2)).unwrap();
        let q = quasi_distribution(&plus(), &p).unwrap();
        assert_atoms(&q, &[(0.0, 1.0)], 1e-15);
    }

    #[test]
    fn g_lambda_reduces_for_thermal_state() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let st = InitialState::thermal(1.0).unwrap();
        let lambdas: Vec<f64> = (0..20).map(|k| 0.17 * k as f64).collect();
        let g = g_lambda(&st, &p, &lambdas).unwrap();
        let chi = characteristic_function_tmp(&st, &p, &lambdas).unwrap();
        assert!(g.max_deviation(&chi) < 1e-10);
    }

    #[test]
    fn g_lambda_is_fourier_of_quasi() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let lambdas: Vec<f64> = (0..20).map(|k| 0.21 * k as f64).collect();
        let g = g_lambda(&plus(), &p, &lambdas).unwrap();
        // Oracle: direct sum over the hand-computed quasi atoms.
        let atoms = [
            (-2.0, 0.25),
            (-1.0, -0.5),
            (0.0, 0.5),
            (1.0, 0.5),
            (2.0, 0.25),
        ];
        for (l, v) in g.iter() {
            let oracle: C64 = atoms
                .iter()
                .map(|(w, p)| C64::from_polar(1.0, l * w) * p)
                .sum();
            assert!((v - oracle).norm() < 1e-13);
        }
    }

    #[test]
    fn supports() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        assert_eq!(tmp_support(&p), vec![-2.0, 0.0, 2.0]);
        assert_eq!(quasi_support(&p), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let st = InitialState::density(identity(3).scale(1.0 / 3.0)).unwrap();
        assert!(matches!(
            tmp_distribution(&st, &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
