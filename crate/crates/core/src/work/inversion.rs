//! Recovering work atoms from characteristic-function samples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::characteristic::CharacteristicFunctionSamples;
use super::distribution::{Atom, DistributionKind, WorkDistribution};
use crate::error::{Error, Result};

/// Systems with a larger condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionResult {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
    /// `‖A w − χ‖₂` over all samples.
    pub residual_norm: f64,
    pub condition_number: f64,
}

impl InversionResult {
    /// Wraps the weights as a distribution; fails when they are not
    /// normalised (e.g. noisy samples).
    pub fn into_distribution(self, kind: DistributionKind) -> Result<WorkDistribution> {
        let atoms = self
            .support
            .iter()
            .zip(&self.weights)
            .map(|(&w, &weight)| Atom { w, weight })
            .collect();
        WorkDistribution::new(atoms, kind, 0.0)
    }
}

/// Real weights `w_k` minimising `Σ_n |Σ_k w_k e^{iλ_n s_k} − χ_n|²` on the
/// candidate support `s`.
pub fn invert_characteristic(
    samples: &CharacteristicFunctionSamples,
    candidate_support: &[f64],
) -> Result<InversionResult> {
    let n = samples.len();
    let k = candidate_support.len();
    if k == 0 {
        return Err(Error::InvalidParameter("empty candidate support".into()));
    }
    if n < k {
        return Err(Error::InvalidParameter(format!(
            "{n} samples cannot determine {k} weights"
        )));
    }
    // Stack real and imaginary parts so the unknowns stay real.
    let a = DMatrix::from_fn(2 * n, k, |row, col| {
        let phase = samples.lambdas[row % n] * candidate_support[col];
        if row < n {
            phase.cos()
        } else {
            phase.sin()
        }
    });
    let b = DVector::from_fn(2 * n, |row, _| {
        let v = samples.values[row % n];
        if row < n {
            v.re
        } else {
            v.im
        }
    });
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition_number <= MAX_CONDITION) {
        return Err(Error::IllConditioned {
            cond: condition_number,
        });
    }
    // Householder QR for the weights; the SVD above only supplies the
    // conditioning estimate and can stop short of full accuracy.
    let qr = a.clone().qr();
    let rhs = qr.q().transpose() * &b;
    let w = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::NumericalCheck("least-squares solve failed".into()))?;
    let residual_norm = (&a * &w - &b).norm();
    Ok(InversionResult {
        support: candidate_support.to_vec(),
        weights: w.iter().copied().collect(),
        residual_norm,
        condition_number,
    })
}

/// Uniform grid `start, start + step, …` with `count` points.
pub fn lambda_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start + step * k as f64).collect()
}

/// Grid on `[0, λ_max]` resolving the given support: the step keeps the
/// largest |w| below the Nyquist limit and the span separates the closest
/// pair of support points by at least two full periods.
pub fn suggest_lambda_grid(support: &[f64], max_points: usize) -> Vec<f64> {
    let wmax = support
        .iter()
        .fold(0.0_f64, |m, w| m.max(w.abs()))
        .max(1e-12);
    let mut gap = f64::INFINITY;
    for pair in support.windows(2) {
        gap = gap.min(pair[1] - pair[0]);
    }
    if !gap.is_finite() || gap <= 0.0 {
        gap = wmax;
    }
    let step = std::f64::consts::PI / (2.0 * wmax);
    let span = 4.0 * std::f64::consts::PI / gap;
    let count = ((span / step).ceil() as usize + 1)
        .max(2 * support.len() + 1)
        .min(max_points.max(support.len()));
    lambda_grid(0.0, step, count)
}

/// Window applied before the direct Fourier sum in [`windowed_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

/// Smoothed density `P(W) ≈ (1/π) ∫₀^Λ win(λ) Re[χ_λ e^{−iλW}] dλ` from samples on a
/// uniform grid starting at λ = 0, using `χ_{−λ} = χ_λ*` (trapezoid rule).
///
/// This mimics the spectrum an experiment obtains from a finite sampling
/// window; peaks are broadened by roughly `2π/Λ`.
pub fn windowed_density(
    samples: &CharacteristicFunctionSamples,
    w_grid: &[f64],
    window: Window,
) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < 2 || samples.lambdas[0] != 0.0 {
        return Err(Error::InvalidParameter(
            "windowed transform needs at least two samples starting at lambda = 0".into(),
        ));
    }
    let step = samples.lambdas[1] - samples.lambdas[0];
    let uniform = samples
        .lambdas
        .windows(2)
        .all(|p| ((p[1] - p[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    if !(step > 0.0) || !uniform {
        return Err(Error::InvalidParameter(
            "windowed transform needs a uniform increasing lambda grid".into(),
        ));
    }
    let span = samples.lambdas[n - 1];
    let win = |l: f64| match window {
        Window::Rectangular => 1.0,
        Window::Hann => (std::f64::consts::FRAC_PI_2 * l / span).cos().powi(2),
    };
    Ok(w_grid
        .iter()
        .map(|&w| {
            let mut acc = 0.0;
            for (idx, (l, chi)) in samples.iter().enumerate() {
                let trap = if idx == 0 || idx == n - 1 { 0.5 } else { 1.0 };
                acc += trap * win(l) * (chi * C64::from_polar(1.0, -l * w)).re;
            }
            acc * step / std::f64::consts::PI
        })
        .collect())
}
