//! First and second work moments from three routes: the quasi-probability
//! atoms, operator expectation values, and finite differences of `G_λ`.

use serde::{Deserialize, Serialize};

use super::characteristic::{g_lambda, quasi_distribution, tmp_distribution, transition_data};
use super::distribution::WorkDistribution;
use crate::error::Result;
use crate::process::Process;
use crate::quantum::expectation;
use crate::state::InitialState;

/// Step used for the finite-difference derivatives of `G_λ` at λ = 0.
const FD_STEP: f64 = 1e-4;

pub fn work_moments(dist: &WorkDistribution, order: u32) -> f64 {
    dist.moment(order)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    /// First moment of the quasi-probability distribution.
    pub quasi_first: f64,
    /// `Tr[H_T ρ_T] − Tr[H_0 ρ_0]`.
    pub energy_change: f64,
    pub first_delta: f64,
    /// Second moment of the quasi-probability distribution.
    pub quasi_second: f64,
    /// `Tr[(U† H_T U − H_0)² ρ_0]`.
    pub second_operator: f64,
    pub second_delta: f64,
    /// First moment of the two-measurement distribution.
    pub tmp_first: f64,
    /// `quasi_first − tmp_first`.
    pub coherence_term: f64,
    /// `Σ_{j; i,k in distinct levels} ε_j^T Re[ρ_{ik} U_{ji} U*_{jk}]`.
    pub coherence_term_explicit: f64,
    /// `−i dG/dλ` and `−d²G/dλ²` at λ = 0 by central differences.
    pub fd_first: f64,
    pub fd_second: f64,
}

impl MomentReport {
    pub fn max_delta(&self) -> f64 {
        self.first_delta
            .abs()
            .max(self.second_delta.abs())
            .max((self.coherence_term - self.coherence_term_explicit).abs())
    }
}

pub fn moment_identities_check(state: &InitialState, process: &Process) -> Result<MomentReport> {
    let quasi = quasi_distribution(state, process)?;
    let tmp = tmp_distribution(state, process)?;
    let rho0 = state.to_density(process)?;
    let u = process.u();

    let rho_t = u * &rho0 * u.adjoint();
    let energy_change =
        expectation(process.ht(), &rho_t)?.re - expectation(process.h0(), &rho0)?.re;
    let work_op = u.adjoint() * process.ht() * u - process.h0();
    let second_operator = expectation(&(&work_op * &work_op), &rho0)?.re;

    let rho_b = state.energy_basis_matrix(process)?;
    let amp = transition_data(state, process)?.u_elements;
    let levels = process.initial_spectrum().level_of();
    let et = process.final_spectrum().basis_energies();
    let n = process.dim();
    let mut coherence_term_explicit = 0.0;
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                if levels[i] != levels[k] {
                    coherence_term_explicit +=
                        et[j] * (rho_b[(i, k)] * amp[(j, i)] * amp[(j, k)].conj()).re;
                }
            }
        }
    }

    let g = g_lambda(state, process, &[-FD_STEP, 0.0, FD_STEP])?.values;
    let fd_first = ((g[2] - g[0]) / (2.0 * FD_STEP)).im;
    let fd_second = -((g[2] - 2.0 * g[1] + g[0]) / (FD_STEP * FD_STEP)).re;

    let quasi_first = quasi.moment(1);
    let quasi_second = quasi.moment(2);
    let tmp_first = tmp.moment(1);
    Ok(MomentReport {
        quasi_first,
        energy_change,
        first_delta: quasi_first - energy_change,
        quasi_second,
        second_operator,
        second_delta: quasi_second - second_operator,
        tmp_first,
        coherence_term: quasi_first - tmp_first,
        coherence_term_explicit,
        fd_first,
        fd_second,
    })
}
