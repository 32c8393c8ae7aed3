//! A driven process: initial and final Hamiltonians plus the evolution
//! operator connecting them.

use crate::error::Result;
use crate::quantum::{
    check_hermitian, check_same_dim, check_unitary, evolve, identity, spectral_decompose,
    HamiltonianSchedule, Operator, SpectralDecomposition, DEFAULT_CLUSTER_TOL,
};

/// `(H_0, H_T, U)` with the eigenbases of both endpoint Hamiltonians cached.
#[derive(Debug, Clone)]
pub struct Process {
    h0: Operator,
    ht: Operator,
    u: Operator,
    initial: SpectralDecomposition,
    fin: SpectralDecomposition,
}

impl Process {
    pub fn new(h0: Operator, ht: Operator, u: Operator) -> Result<Self> {
        Self::with_cluster_tol(h0, ht, u, DEFAULT_CLUSTER_TOL)
    }

    pub fn with_cluster_tol(
        h0: Operator,
        ht: Operator,
        u: Operator,
        cluster_tol: f64,
    ) -> Result<Self> {
        check_hermitian(&h0)?;
        check_same_dim(h0.nrows(), &[&ht, &u])?;
        check_hermitian(&ht)?;
        check_unitary(&u)?;
        let initial = spectral_decompose(&h0, cluster_tol)?;
        let fin = spectral_decompose(&ht, cluster_tol)?;
        Ok(Process {
            h0,
            ht,
            u,
            initial,
            fin,
        })
    }

    /// Endpoints of the schedule with the midpoint-rule propagator.
    pub fn from_schedule(schedule: &HamiltonianSchedule, steps_per_segment: usize) -> Result<Self> {
        let u = evolve(schedule, steps_per_segment)?;
        let h0 = schedule.initial_hamiltonian().expect("validated by evolve");
        let ht = schedule.final_hamiltonian().expect("validated by evolve");
        Process::new(h0, ht, u)
    }

    /// Instantaneous change `H_0 → H_T` with `U = I`.
    pub fn sudden(h0: Operator, ht: Operator) -> Result<Self> {
        let u = identity(h0.nrows());
        Process::new(h0, ht, u)
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &Operator {
        &self.h0
    }

    pub fn ht(&self) -> &Operator {
        &self.ht
    }

    pub fn u(&self) -> &Operator {
        &self.u
    }

    pub fn initial_spectrum(&self) -> &SpectralDecomposition {
        &self.initial
    }

    pub fn final_spectrum(&self) -> &SpectralDecomposition {
        &self.fin
    }

    /// `U_{ji} = ⟨ε_j^T| U |ε_i^0⟩` in the cached eigenbases.
    pub fn transition_amplitudes(&self) -> Operator {
        self.fin.basis().adjoint() * &self.u * self.initial.basis()
    }

    /// `ρ_{ik} = ⟨ε_i^0| ρ |ε_k^0⟩`.
    pub fn in_initial_basis(&self, rho: &Operator) -> Operator {
        self.initial.basis().adjoint() * rho * self.initial.basis()
    }

    /// Process with `U → U†` and the endpoints exchanged.
    pub fn reversed(&self) -> Result<Self> {
        Process::new(self.ht.clone(), self.h0.clone(), self.u.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;

    #[test]
    fn amplitudes_in_diagonal_basis() {
        let p = Process::new(pauli_z(), pauli_z(), pauli_x()).unwrap();
        let a = p.transition_amplitudes();
        // Levels ordered by energy: index 0 is ε = −1, i.e. |1⟩ in the
        // computational basis. σ_x swaps the two.
        assert!((a[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(a[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(Process::new(pauli_z(), pauli_z(), diag(&[1.0, 0.5])).is_err());
        assert!(Process::new(pauli_z(), identity(3), identity(2)).is_err());
    }
}
