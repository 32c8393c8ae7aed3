//! Ancilla-qubit Ramsey scheme for the characteristic function.
//!
//! Tensor ordering is system ⊗ qubit throughout.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::process::Process;
use crate::quantum::{
    diag, expectation, hadamard, identity, partial_trace, pauli_x, pauli_y, pauli_z, tensor,
    Operator,
};
use crate::state::InitialState;

#[derive(Debug, Clone)]
pub struct RamseyOutcome {
    pub lambda: f64,
    pub rho_qubit: Operator,
    pub sigma_z: f64,
    pub sigma_y: f64,
    /// `⟨σ_z⟩ + i⟨σ_y⟩`.
    pub chi: C64,
}

impl RamseyOutcome {
    /// Probability of the `+1` outcome for `σ_z`.
    pub fn p_plus_z(&self) -> f64 {
        (0.5 * (1.0 + self.sigma_z)).clamp(0.0, 1.0)
    }

    /// Probability of the `+1` outcome for `σ_y`.
    pub fn p_plus_y(&self) -> f64 {
        (0.5 * (1.0 + self.sigma_y)).clamp(0.0, 1.0)
    }
}

fn qubit_projectors() -> (Operator, Operator) {
    (diag(&[1.0, 0.0]), diag(&[0.0, 1.0]))
}

/// `M_λ = U e^{−iλH_0} ⊗ |0⟩⟨0| + e^{−iλH_T} U ⊗ |1⟩⟨1|`.
pub fn build_m_lambda(process: &Process, lambda: f64) -> Operator {
    let (p0, p1) = qubit_projectors();
    let u = process.u();
    let first = u * process.initial_spectrum().propagator(lambda);
    let second = process.final_spectrum().propagator(lambda) * u;
    tensor(&first, &p0) + tensor(&second, &p1)
}

/// Local factors with `(I⊗σ_x) M₂ (I⊗σ_x) M₁ = M_λ`:
/// `M₁ = I ⊗ |0⟩⟨0| + e^{−iλH_T} U ⊗ |1⟩⟨1|` and
/// `M₂ = I ⊗ |0⟩⟨0| + U e^{−iλH_0} ⊗ |1⟩⟨1|`.
pub fn build_m1_m2(process: &Process, lambda: f64) -> (Operator, Operator) {
    let (p0, p1) = qubit_projectors();
    let n = process.dim();
    let u = process.u();
    let id = tensor(&identity(n), &p0);
    let m1 = &id + tensor(&(process.final_spectrum().propagator(lambda) * u), &p1);
    let m2 = &id + tensor(&(u * process.initial_spectrum().propagator(lambda)), &p1);
    (m1, m2)
}

/// `(I⊗σ_x) M₂ (I⊗σ_x) M₁`.
pub fn compose_m1_m2(m1: &Operator, m2: &Operator) -> Operator {
    let flip = tensor(&identity(m1.nrows() / 2), &pauli_x());
    &flip * m2 * &flip * m1
}

/// Full circuit `(I⊗H)·M_λ·(I⊗H)` acting on system ⊗ qubit.
pub fn ramsey_circuit(process: &Process, lambda: f64) -> Operator {
    let had = tensor(&identity(process.dim()), &hadamard());
    &had * build_m_lambda(process, lambda) * &had
}

fn outcome_for(rho_s: &Operator, process: &Process, lambda: f64) -> Result<RamseyOutcome> {
    let (p0, _) = qubit_projectors();
    let joint = tensor(rho_s, &p0);
    let circuit = ramsey_circuit(process, lambda);
    let evolved = &circuit * joint * circuit.adjoint();
    let rho_qubit = partial_trace(&evolved, 0, &[process.dim(), 2])?;
    let sigma_z = expectation(&pauli_z(), &rho_qubit)?.re;
    let sigma_y = expectation(&pauli_y(), &rho_qubit)?.re;
    if !(sigma_z.is_finite() && sigma_y.is_finite()) {
        return Err(Error::NumericalCheck("non-finite qubit expectation".into()));
    }
    Ok(RamseyOutcome {
        lambda,
        rho_qubit,
        sigma_z,
        sigma_y,
        chi: C64::new(sigma_z, sigma_y),
    })
}

/// Runs the three-step circuit on `ρ_S ⊗ |0⟩⟨0|` for each λ and reads
/// `χ_λ = ⟨σ_z⟩ + i⟨σ_y⟩` off the reduced qubit state.
pub fn run_ramsey(
    state: &InitialState,
    process: &Process,
    lambdas: &[f64],
) -> Result<Vec<RamseyOutcome>> {
    let rho_s = state.to_density(process)?;
    lambdas
        .par_iter()
        .map(|&l| outcome_for(&rho_s, process, l))
        .collect()
}
