//! Jarzynski and Tasaki–Crooks checks on work distributions.

use serde::{Deserialize, Serialize};

use super::distribution::{DistributionKind, WorkDistribution};
use crate::error::{Error, Result};
use crate::quantum::{log_partition_function, Operator};

/// Atoms lighter than this may stay unpaired in a Crooks check.
pub const UNPAIRED_TOL: f64 = 1e-12;

/// Free-energy difference `−(1/β) ln(Z_T/Z_0)` between the Gibbs states of
/// two Hamiltonians.
pub fn delta_f(h0: &Operator, ht: &Operator, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let ln_z0 = log_partition_function(h0, beta)?;
    let ln_zt = log_partition_function(ht, beta)?;
    Ok(-(ln_zt - ln_z0) / beta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JarzynskiReport {
    pub beta: f64,
    pub delta_f: f64,
    /// `⟨e^{−βW}⟩`.
    pub mean_exp: f64,
    /// `e^{−βΔF}`.
    pub target: f64,
    /// `|⟨e^{−βW}⟩ − e^{−βΔF}| / e^{−βΔF}`.
    pub relative_deviation: f64,
    /// `−(1/β) ln⟨e^{−βW}⟩`.
    pub free_energy_estimate: f64,
}

pub fn jarzynski_check(
    dist: &WorkDistribution,
    beta: f64,
    delta_f: f64,
) -> Result<JarzynskiReport> {
    if dist.kind() != DistributionKind::Probability {
        return Err(Error::InvalidParameter(
            "Jarzynski check needs a probability distribution".into(),
        ));
    }
    let mean_exp = dist.exponential_average(beta);
    let target = (-beta * delta_f).exp();
    Ok(JarzynskiReport {
        beta,
        delta_f,
        mean_exp,
        target,
        relative_deviation: (mean_exp - target).abs() / target,
        free_energy_estimate: -mean_exp.ln() / beta,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrooksPoint {
    pub w: f64,
    pub forward: f64,
    pub backward: f64,
    /// `ln[P_F(W) / P_B(−W)]`.
    pub log_ratio: f64,
    /// Standard deviation of `log_ratio` used as a fit weight, if any.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrooksReport {
    pub beta: f64,
    pub points: Vec<CrooksPoint>,
    /// Fitted slope of `log_ratio` against `W`; equals β for exact data.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    /// `−intercept / slope`.
    pub delta_f: f64,
    pub delta_f_se: f64,
}

impl CrooksReport {
    /// Largest `|ln[P_F/P_B] − β(W − ΔF)|` over the paired atoms.
    pub fn max_deviation_from(&self, beta: f64, delta_f: f64) -> f64 {
        self.points
            .iter()
            .map(|p| (p.log_ratio - beta * (p.w - delta_f)).abs())
            .fold(0.0, f64::max)
    }
}

/// Pairs forward atoms at `W` with backward atoms at `−W`. With `strict`,
/// an atom above [`UNPAIRED_TOL`] without a partner is an error; otherwise
/// it is skipped, as for outcomes never observed in the other leg.
fn pair_atoms(
    forward: &WorkDistribution,
    backward: &WorkDistribution,
    strict: bool,
) -> Result<Vec<(f64, f64, f64)>> {
    let scale = forward
        .atoms()
        .iter()
        .chain(backward.atoms())
        .fold(1.0_f64, |m, a| m.max(a.w.abs()));
    let tol = 1e-9 * scale;
    let mirrored = backward.mirrored();
    let mut used = vec![false; mirrored.len()];
    let mut pairs = Vec::new();
    for fa in forward.atoms() {
        let found = mirrored
            .atoms()
            .iter()
            .position(|b| (b.w - fa.w).abs() <= tol);
        match found {
            Some(idx) => {
                used[idx] = true;
                pairs.push((fa.w, fa.weight, mirrored.atoms()[idx].weight));
            }
            None if strict && fa.weight > UNPAIRED_TOL => {
                return Err(Error::UnpairedAtom {
                    w: fa.w,
                    weight: fa.weight,
                })
            }
            None => {}
        }
    }
    for (b, &u) in mirrored.atoms().iter().zip(&used) {
        if strict && !u && b.weight > UNPAIRED_TOL {
            return Err(Error::UnpairedAtom {
                w: -b.w,
                weight: b.weight,
            });
        }
    }
    Ok(pairs)
}

struct LineFit {
    slope: f64,
    intercept: f64,
    slope_se: f64,
    intercept_se: f64,
    cov: f64,
}

/// Least squares `y = a + b x`. With `sigmas`, a weighted fit whose standard
/// errors come from the given variances; otherwise ordinary least squares
/// with residual-based errors.
fn fit_line(xs: &[f64], ys: &[f64], sigmas: Option<&[f64]>) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "line fit needs at least two paired atoms, got {n}"
        )));
    }
    let weights: Vec<f64> = match sigmas {
        Some(s) => s.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; n],
    };
    let sw: f64 = weights.iter().sum();
    let sx: f64 = weights.iter().zip(xs).map(|(w, x)| w * x).sum();
    let sy: f64 = weights.iter().zip(ys).map(|(w, y)| w * y).sum();
    let xbar = sx / sw;
    let ybar = sy / sw;
    let sxx: f64 = weights
        .iter()
        .zip(xs)
        .map(|(w, x)| w * (x - xbar).powi(2))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter(
            "line fit needs at least two distinct work values".into(),
        ));
    }
    let sxy: f64 = weights
        .iter()
        .zip(xs.iter().zip(ys))
        .map(|(w, (x, y))| w * (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let scale = match sigmas {
        Some(_) => 1.0,
        None if n > 2 => {
            let rss: f64 = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| (y - intercept - slope * x).powi(2))
                .sum();
            rss / (n - 2) as f64
        }
        None => 0.0,
    };
    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + xbar * xbar / sxx);
    Ok(LineFit {
        slope,
        intercept,
        slope_se: var_slope.sqrt(),
        intercept_se: var_intercept.sqrt(),
        cov: -xbar * var_slope,
    })
}

fn crooks_report(beta: f64, points: Vec<CrooksPoint>, weighted: bool) -> Result<CrooksReport> {
    let xs: Vec<f64> = points.iter().map(|p| p.w).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.log_ratio).collect();
    let sigmas: Option<Vec<f64>> = if weighted {
        points.iter().map(|p| p.sigma).collect()
    } else {
        None
    };
    let fit = fit_line(&xs, &ys, sigmas.as_deref())?;
    let delta_f = -fit.intercept / fit.slope;
    // Delta method on −a/b.
    let ga = -1.0 / fit.slope;
    let gb = fit.intercept / (fit.slope * fit.slope);
    let var = ga * ga * fit.intercept_se.powi(2)
        + gb * gb * fit.slope_se.powi(2)
        + 2.0 * ga * gb * fit.cov;
    Ok(CrooksReport {
        beta,
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se,
        intercept_se: fit.intercept_se,
        delta_f,
        delta_f_se: var.max(0.0).sqrt(),
    })
}

/// Per-atom `ln[P_F(W)/P_B(−W)]` with an ordinary least-squares line.
pub fn crooks_check(
    forward: &WorkDistribution,
    backward: &WorkDistribution,
    beta: f64,
) -> Result<CrooksReport> {
    let points = pair_atoms(forward, backward, true)?
        .into_iter()
        .filter(|&(_, f, b)| f > 0.0 && b > 0.0)
        .map(|(w, f, b)| CrooksPoint {
            w,
            forward: f,
            backward: b,
            log_ratio: (f / b).ln(),
            sigma: None,
        })
        .collect();
    crooks_report(beta, points, false)
}

/// Crooks check for empirical distributions from `n_forward` and
/// `n_backward` shots: a weighted fit with binomial variances
/// `(1 − p)/(n p)` on each log-frequency. Work values seen in only one leg
/// carry no log-ratio and are left out.
pub fn crooks_check_sampled(
    forward: &WorkDistribution,
    backward: &WorkDistribution,
    beta: f64,
    n_forward: u64,
    n_backward: u64,
) -> Result<CrooksReport> {
    let var = |p: f64, n: u64| (1.0 - p) / (n as f64 * p);
    let points = pair_atoms(forward, backward, false)?
        .into_iter()
        .filter(|&(_, f, b)| f > 0.0 && b > 0.0)
        .map(|(w, f, b)| CrooksPoint {
            w,
            forward: f,
            backward: b,
            log_ratio: (f / b).ln(),
            sigma: Some((var(f, n_forward) + var(b, n_backward)).sqrt().max(1e-300)),
        })
        .collect();
    crooks_report(beta, points, true)
}
