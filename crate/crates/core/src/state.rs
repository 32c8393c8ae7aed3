//! Initial system states.
//!
//! Thermal and ground states are kept symbolic so that their populations in
//! the initial energy basis are exact; a dense density matrix only carries
//! ~1e-16 absolute precision, which is not enough for Boltzmann factors of
//! order 1e-20 in a log-ratio.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::process::Process;
use crate::quantum::{
    boltzmann_weights, check_density, check_same_dim, ground_state, projector, thermal_state, Ket,
    Operator, ThermalConfig, STRUCTURE_TOL,
};

#[derive(Debug, Clone)]
pub enum InitialState {
    /// Gibbs state of the process' initial Hamiltonian.
    Thermal(ThermalConfig),
    /// Zero-temperature limit of [`InitialState::Thermal`].
    Ground,
    Density(Operator),
    Pure(Ket),
}

impl InitialState {
    pub fn thermal(beta: f64) -> Result<Self> {
        Ok(InitialState::Thermal(ThermalConfig::new(beta)?))
    }

    pub fn density(rho: Operator) -> Result<Self> {
        check_density(&rho)?;
        Ok(InitialState::Density(rho))
    }

    pub fn pure(psi: Ket) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::NotDensity(format!(
                "state vector has norm {norm}, expected 1"
            )));
        }
        Ok(InitialState::Pure(psi))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            InitialState::Density(rho) => check_same_dim(dim, &[rho]),
            InitialState::Pure(psi) if psi.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Density operator in the computational basis.
    pub fn to_density(&self, process: &Process) -> Result<Operator> {
        self.check_dim(process.dim())?;
        match self {
            InitialState::Thermal(cfg) => thermal_state(process.h0(), *cfg),
            InitialState::Ground => ground_state(process.h0()),
            InitialState::Density(rho) => Ok(rho.clone()),
            InitialState::Pure(psi) => Ok(projector(psi)),
        }
    }

    /// Matrix elements `ρ_{ik}` in the eigenbasis of `H_0` cached by the
    /// process. Exact (diagonal) for thermal and ground states.
    pub fn energy_basis_matrix(&self, process: &Process) -> Result<Operator> {
        self.check_dim(process.dim())?;
        let sd = process.initial_spectrum();
        let n = process.dim();
        let per_level: Option<Vec<f64>> = match self {
            InitialState::Thermal(cfg) => {
                let w = boltzmann_weights(sd, cfg.beta());
                Some(
                    w.iter()
                        .zip(&sd.multiplicities)
                        .map(|(w, &m)| w / m as f64)
                        .collect(),
                )
            }
            InitialState::Ground => Some(
                (0..sd.levels())
                    .map(|l| {
                        if l == 0 {
                            1.0 / sd.multiplicities[0] as f64
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            ),
            _ => None,
        };
        match per_level {
            Some(w) => {
                let mut out = Operator::zeros(n, n);
                for (col, &level) in sd.level_of().iter().enumerate() {
                    out[(col, col)] = C64::new(w[level], 0.0);
                }
                Ok(out)
            }
            None => Ok(process.in_initial_basis(&self.to_density(process)?)),
        }
    }

    /// True when the state commutes with `H_0` (no coherences between
    /// distinct levels), within `tol`.
    pub fn is_incoherent(&self, process: &Process, tol: f64) -> Result<bool> {
        let rho = self.energy_basis_matrix(process)?;
        let levels = process.initial_spectrum().level_of();
        for i in 0..rho.nrows() {
            for k in 0..rho.ncols() {
                if levels[i] != levels[k] && rho[(i, k)].norm() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl TryFrom<Operator> for InitialState {
    type Error = Error;

    fn try_from(rho: Operator) -> Result<Self> {
        InitialState::density(rho)
    }
}
