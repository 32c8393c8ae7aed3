//! Dense operator algebra, spectral decomposition, thermal states and
//! time-ordered evolution.

mod evolution;
mod operator;
mod spectral;
mod thermal;

pub use evolution::{evolve, HamiltonianFn, HamiltonianSchedule, Segment};
pub use operator::*;
pub use spectral::{
    expm_hermitian, spectral_decompose, SpectralDecomposition, DEFAULT_CLUSTER_TOL,
};
pub use thermal::{
    boltzmann_weights, ground_state, log_partition_function, thermal_state, ThermalConfig,
};
