use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::operator::Operator;
use super::spectral::{spectral_decompose, SpectralDecomposition, DEFAULT_CLUSTER_TOL};
use crate::error::{Error, Result};

/// Inverse temperature of a Gibbs state. Zero-temperature states go through
/// [`ground_state`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    beta: f64,
}

impl ThermalConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and non-negative, got {beta}"
            )));
        }
        Ok(ThermalConfig { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Boltzmann weights `e^{−β ε_i} m_i / Z` of the levels, shifted by the
/// ground energy so that nothing overflows.
pub fn boltzmann_weights(sd: &SpectralDecomposition, beta: f64) -> Vec<f64> {
    let e0 = sd.energies[0];
    let raw: Vec<f64> = sd
        .energies
        .iter()
        .zip(&sd.multiplicities)
        .map(|(e, &m)| m as f64 * (-beta * (e - e0)).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / z).collect()
}

/// `ln Z = ln Tr e^{−βH}`, computed with a spectral shift.
pub fn log_partition_function(h: &Operator, beta: f64) -> Result<f64> {
    let sd = spectral_decompose(h, DEFAULT_CLUSTER_TOL)?;
    let e0 = sd.energies[0];
    let shifted: f64 = sd
        .energies
        .iter()
        .zip(&sd.multiplicities)
        .map(|(e, &m)| m as f64 * (-beta * (e - e0)).exp())
        .sum();
    Ok(-beta * e0 + shifted.ln())
}

/// Gibbs state `e^{−βH}/Z`.
pub fn thermal_state(h: &Operator, cfg: ThermalConfig) -> Result<Operator> {
    let sd = spectral_decompose(h, DEFAULT_CLUSTER_TOL)?;
    let weights = boltzmann_weights(&sd, cfg.beta);
    Ok(mixture_of_levels(&sd, |level| {
        weights[level] / sd.multiplicities[level] as f64
    }))
}

/// β → ∞ limit: uniform mixture over the (possibly degenerate) ground level.
pub fn ground_state(h: &Operator) -> Result<Operator> {
    let sd = spectral_decompose(h, DEFAULT_CLUSTER_TOL)?;
    let m = sd.multiplicities[0] as f64;
    Ok(mixture_of_levels(&sd, |level| {
        if level == 0 {
            1.0 / m
        } else {
            0.0
        }
    }))
}

fn mixture_of_levels<F: Fn(usize) -> f64>(sd: &SpectralDecomposition, per_state: F) -> Operator {
    let n = sd.dim();
    let mut rho = Operator::zeros(n, n);
    for (level, p) in sd.projectors.iter().enumerate() {
        rho += p * C64::new(per_state(level), 0.0);
    }
    rho
}
