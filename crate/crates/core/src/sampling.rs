//! Shot-level Monte Carlo of the measurement protocols.
//!
//! Every shot owns a ChaCha8 stream keyed by `(seed, shot index)`, so the
//! outcome of a shot never depends on how shots are spread over threads.
//! Aggregates are built from integer counts or from per-shot values in shot
//! order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::detector::{protocol2_mixture, DetectorConfig, GaussianMixture, PositionDistribution};
use crate::error::{Error, Result};
use crate::process::Process;
use crate::ramsey::run_ramsey;
use crate::state::InitialState;
use crate::work::{transition_data, Atom, DistributionKind, WorkDistribution};

/// Shots per work unit when counting in parallel.
const CHUNK: u64 = 1 << 14;

/// Nodes of the inverse-CDF table used for signed mixtures.
pub const INVERSE_CDF_POINTS: usize = 1 << 14;

/// Two-sided 99% Kolmogorov–Smirnov coefficient: `D_n ≤ 1.628/√n`.
pub const KS_99: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingProtocol {
    Tmp,
    Ramsey,
    Protocol2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
    pub protocol: SamplingProtocol,
}

impl ShotPlan {
    pub fn new(shots: u64, seed: u64, protocol: SamplingProtocol) -> Result<Self> {
        let plan = ShotPlan {
            shots,
            seed,
            protocol,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidParameter(
                "shot plan needs at least one shot".into(),
            ));
        }
        Ok(())
    }
}

/// Random stream of one shot.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimates: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub shots_used: u64,
}

impl EstimateReport {
    fn insert(&mut self, name: &str, value: f64, se: f64) {
        self.estimates.insert(name.to_string(), value);
        self.standard_errors.insert(name.to_string(), se.max(0.0));
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).copied()
    }

    pub fn standard_error(&self, name: &str) -> Option<f64> {
        self.standard_errors.get(name).copied()
    }
}

/// Sample mean and standard error of the mean.
fn mean_and_se(values: impl Iterator<Item = (f64, u64)> + Clone, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().map(|(v, c)| v * c as f64).sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|(v, c)| c as f64 * (v - mean).powi(2)).sum();
    (mean, (ss / (nf - 1.0) / nf).sqrt())
}

/// Index of the first cumulative entry above `u`; the last index catches
/// rounding at the top.
fn draw_index(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p.max(0.0) / total;
            acc
        })
        .collect()
}

/// Per-shot counts over `categories` outcomes, summed chunk by chunk.
fn count_shots<F>(plan: &ShotPlan, categories: usize, draw: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let chunks = plan.shots.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; categories];
            let end = ((c + 1) * CHUNK).min(plan.shots);
            for shot in c * CHUNK..end {
                let mut rng = shot_rng(plan.seed, shot);
                counts[draw(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; categories],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Outcome counts of a two-measurement run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TmpSample {
    /// `(initial level, final level, work, count)` for every pair.
    pub counts: Vec<(usize, usize, f64, u64)>,
    pub distribution: WorkDistribution,
    pub report: EstimateReport,
}

impl TmpSample {
    pub fn shots(&self) -> u64 {
        self.report.shots_used
    }

    /// `⟨e^{−βW}⟩` over the shots with its standard error.
    pub fn jarzynski_estimate(&self, beta: f64) -> (f64, f64) {
        mean_and_se(
            self.counts
                .iter()
                .map(|&(_, _, w, c)| ((-beta * w).exp(), c)),
            self.shots(),
        )
    }

    /// Counts aggregated per distinct work value, in ascending order.
    pub fn counts_by_work(&self, tol: f64) -> Vec<(f64, u64)> {
        crate::work::distribution::merge_atoms(
            self.counts.iter().map(|&(_, _, w, c)| (w, c)).collect(),
            tol,
            |acc: &mut u64, x| *acc += x,
        )
    }
}

/// Draws an initial level from `P_i`, then a final level from `P_{i→j}`.
pub fn sample_tmp(state: &InitialState, process: &Process, plan: &ShotPlan) -> Result<TmpSample> {
    plan.validate()?;
    let data = transition_data(state, process)?;
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let (n0, nt) = (e0.len(), et.len());
    let first = cumulative(&data.p_i);
    let second: Vec<Vec<f64>> = data.p_ij.iter().map(|row| cumulative(row)).collect();
    let counts = count_shots(plan, n0 * nt, |rng| {
        let i = draw_index(&first, rng.random::<f64>());
        let j = draw_index(&second[i], rng.random::<f64>());
        i * nt + j
    });
    let mut pairs = Vec::with_capacity(n0 * nt);
    let mut atoms = Vec::with_capacity(n0 * nt);
    for i in 0..n0 {
        for j in 0..nt {
            let c = counts[i * nt + j];
            let w = et[j] - e0[i];
            pairs.push((i, j, w, c));
            if c > 0 {
                atoms.push(Atom {
                    w,
                    weight: c as f64 / plan.shots as f64,
                });
            }
        }
    }
    let distribution = WorkDistribution::new(
        atoms,
        DistributionKind::Probability,
        crate::work::default_merge_tol(process),
    )?;
    let mut report = EstimateReport {
        shots_used: plan.shots,
        ..Default::default()
    };
    let (m1, se1) = mean_and_se(pairs.iter().map(|&(_, _, w, c)| (w, c)), plan.shots);
    let (m2, se2) = mean_and_se(pairs.iter().map(|&(_, _, w, c)| (w * w, c)), plan.shots);
    report.insert("mean_w", m1, se1);
    report.insert("second_w", m2, se2);
    Ok(TmpSample {
        counts: pairs,
        distribution,
        report,
    })
}

/// Ramsey tomography at one λ: each shot yields one `σ_z` and one `σ_y`
/// outcome, drawn independently.
pub fn sample_ramsey(
    state: &InitialState,
    process: &Process,
    lambda: f64,
    plan: &ShotPlan,
) -> Result<EstimateReport> {
    plan.validate()?;
    let outcome = run_ramsey(state, process, &[lambda])?.remove(0);
    let (pz, py) = (outcome.p_plus_z(), outcome.p_plus_y());
    // Category bits: 1 = σ_z gave +1, 2 = σ_y gave +1.
    let counts = count_shots(plan, 4, |rng| {
        let z = (rng.random::<f64>() < pz) as usize;
        let y = (rng.random::<f64>() < py) as usize;
        z | (y << 1)
    });
    let plus_z = counts[1] + counts[3];
    let plus_y = counts[2] + counts[3];
    let n = plan.shots;
    let spin = |plus: u64| [(1.0, plus), (-1.0, n - plus)];
    let (sz, se_z) = mean_and_se(spin(plus_z).into_iter(), n);
    let (sy, se_y) = mean_and_se(spin(plus_y).into_iter(), n);
    let mut report = EstimateReport {
        shots_used: n,
        ..Default::default()
    };
    report.insert("sigma_z", sz, se_z);
    report.insert("sigma_y", sy, se_y);
    report.insert("chi_re", sz, se_z);
    report.insert("chi_im", sy, se_y);
    report.insert("lambda", lambda, 0.0);
    Ok(report)
}

/// Pointer readings, one per shot in shot order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionSample {
    pub samples: Vec<f64>,
    pub report: EstimateReport,
}

impl PositionSample {
    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Inverse-CDF table of a mixture over `[lo, hi]`.
struct InverseCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(mixture: &GaussianMixture) -> Self {
        let (cmin, cmax) = mixture.center_range();
        let lo = cmin - 9.0 * mixture.sigma;
        let hi = cmax + 9.0 * mixture.sigma;
        let n = INVERSE_CDF_POINTS;
        let h = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();
        let mut running: f64 = 0.0;
        let raw: Vec<f64> = xs.iter().map(|&x| mixture.cdf(x)).collect();
        let (c0, c1) = (raw[0], raw[n - 1]);
        let cdf = raw
            .into_iter()
            .map(|c| {
                // Monotone envelope against rounding, rescaled to [0, 1].
                running = running.max((c - c0) / (c1 - c0));
                running.min(1.0)
            })
            .collect();
        InverseCdf { xs, cdf }
    }

    fn invert(&self, u: f64) -> f64 {
        let k = self
            .cdf
            .partition_point(|&c| c < u)
            .clamp(1, self.xs.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[k - 1] + t * (self.xs[k] - self.xs[k - 1])
    }
}

/// Draws pointer readings from a position distribution. Atoms and
/// nonnegative mixtures are sampled component-wise; signed mixtures (from
/// coherent inputs) through an inverse-CDF table of the total density.
pub fn sample_position_distribution(
    dist: &PositionDistribution,
    plan: &ShotPlan,
) -> Result<PositionSample> {
    plan.validate()?;
    let shots: Vec<u64> = (0..plan.shots).collect();
    let samples: Vec<f64> = match dist {
        PositionDistribution::Delta(atoms) => {
            let values: Vec<f64> = atoms.atoms().iter().map(|a| a.w).collect();
            let cum = cumulative(&atoms.atoms().iter().map(|a| a.weight).collect::<Vec<_>>());
            shots
                .par_iter()
                .map(|&s| values[draw_index(&cum, shot_rng(plan.seed, s).random::<f64>())])
                .collect()
        }
        PositionDistribution::Mixture(m) if m.components.iter().all(|c| c.weight >= 0.0) => {
            let cum = cumulative(&m.components.iter().map(|c| c.weight).collect::<Vec<_>>());
            shots
                .par_iter()
                .map(|&s| {
                    let mut rng = shot_rng(plan.seed, s);
                    let c = &m.components[draw_index(&cum, rng.random::<f64>())];
                    let z: f64 = rng.sample(StandardNormal);
                    c.center + m.sigma * z
                })
                .collect()
        }
        PositionDistribution::Mixture(m) => {
            let table = InverseCdf::new(m);
            shots
                .par_iter()
                .map(|&s| table.invert(shot_rng(plan.seed, s).random::<f64>()))
                .collect()
        }
    };
    let (mean, se) = mean_and_se(samples.iter().map(|&x| (x, 1)), plan.shots);
    let (second, se2) = mean_and_se(samples.iter().map(|&x| (x * x, 1)), plan.shots);
    let mut report = EstimateReport {
        shots_used: plan.shots,
        ..Default::default()
    };
    report.insert("mean_dx", mean, se);
    report.insert("second_dx", second, se2);
    Ok(PositionSample { samples, report })
}

/// Pointer readings from the finite-width position readout.
pub fn sample_position(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
    plan: &ShotPlan,
) -> Result<PositionSample> {
    let mixture = protocol2_mixture(state, process, cfg)?;
    sample_position_distribution(&PositionDistribution::Mixture(mixture), plan)
}

/// Kolmogorov–Smirnov distance between sorted samples and a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `KS_99/√n`.
pub fn ks_bound_99(n: usize) -> f64 {
    KS_99 / (n as f64).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Pearson goodness of fit at `confidence`. Bins expecting fewer than five
/// counts are pooled into one.
pub fn chi_squared_test(
    counts: &[u64],
    probs: &[f64],
    confidence: f64,
) -> Result<ChiSquaredResult> {
    if counts.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            found: counts.len(),
        });
    }
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        if nf * p >= 5.0 {
            bins.push((c as f64, nf * p));
        } else {
            pooled.0 += c as f64;
            pooled.1 += nf * p;
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return Err(Error::InvalidParameter(
            "chi-squared test needs at least two populated bins".into(),
        ));
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-squared distribution: {e}")))?;
    let critical = dist.inverse_cdf(confidence);
    Ok(ChiSquaredResult {
        statistic,
        dof,
        critical,
        p_value: 1.0 - dist.cdf(statistic),
        pass: statistic <= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;

    #[test]
    fn shot_streams_are_distinct_and_repeatable() {
        let a: u64 = shot_rng(7, 0).random();
        let b: u64 = shot_rng(7, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, shot_rng(7, 0).random::<u64>());
    }

    #[test]
    fn flip_always_gives_plus_two() {
        let p = Process::new(pauli_z(), pauli_z(), pauli_x()).unwrap();
        let plan = ShotPlan::new(1000, 3, SamplingProtocol::Tmp).unwrap();
        let s = sample_tmp(&InitialState::Ground, &p, &plan).unwrap();
        assert_eq!(s.distribution.len(), 1);
        assert_eq!(s.distribution.atoms()[0].w, 2.0);
        assert_eq!(s.report.standard_error("mean_w"), Some(0.0));
    }

    #[test]
    fn single_shot_is_a_legal_atom() {
        let p = Process::new(pauli_z(), pauli_z(), hadamard()).unwrap();
        let plan = ShotPlan::new(1, 11, SamplingProtocol::Tmp).unwrap();
        let s = sample_tmp(&InitialState::thermal(1.0).unwrap(), &p, &plan).unwrap();
        assert_eq!(s.distribution.len(), 1);
        assert!([-2.0, 0.0, 2.0].contains(&s.distribution.atoms()[0].w));
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(ShotPlan::new(0, 1, SamplingProtocol::Tmp).is_err());
    }

    #[test]
    fn chi_squared_accepts_exact_counts() {
        let r = chi_squared_test(&[250, 500, 250], &[0.25, 0.5, 0.25], 0.99).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
        assert!((r.critical - 9.21034).abs() < 1e-4);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) - 0.005).abs() < 1e-12);
    }
}
