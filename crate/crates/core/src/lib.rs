//! Work statistics of driven finite-dimensional quantum systems.
//!
//! The crate computes exact and shot-sampled work statistics for closed,
//! unitarily driven systems: the two-measurement distribution and its
//! characteristic function, the Ramsey ancilla-qubit scheme, the
//! continuous-variable detector protocols (phase readout giving the
//! quasi-probability characteristic function, position readout giving a
//! broadened work density), and fluctuation-theorem checks.
//!
//! Units: ħ = 1, energies and inverse times share one scale.

pub mod detector;
pub mod error;
pub mod models;
pub mod process;
pub mod quantum;
pub mod ramsey;
pub mod sampling;
pub mod state;
pub mod work;

pub use error::{Error, Result};
pub use process::Process;
pub use state::InitialState;
