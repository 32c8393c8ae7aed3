//! `run`, `sample` and `sweep`.

use num_complex::Complex64 as C64;
use qwork_core::detector::{
    joint_evolution, light_ancilla_moments, protocol1_g, protocol2_mixture, protocol2_position_pdf,
    DetectorConfig, GaussianMixture, COVERAGE_SIGMAS,
};
use qwork_core::ramsey::run_ramsey;
use qwork_core::sampling::{
    chi_squared_test, ks_bound_99, ks_statistic, sample_position, sample_ramsey, sample_tmp,
    SamplingProtocol, ShotPlan,
};
use qwork_core::work::{
    characteristic_function_tmp, default_merge_tol, delta_f, g_lambda, invert_characteristic,
    jarzynski_check, moment_identities_check, quasi_distribution, quasi_support, tmp_distribution,
    tmp_support, two_time_correlation, windowed_density, Atom, CharacteristicFunctionSamples,
    DistributionKind, WorkDistribution,
};
use qwork_core::Process;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::{Experiment, InversionMode, ProtocolSpec, ShotSpec};
use crate::error::{CliError, CliResult};
use crate::output::{self, OutputDir, CHI_FILE, DIST_FILE, REPORT_FILE, SWEEP_FILE};
use crate::report::{
    Checks, InversionSummary, Moments, PointerSummary, ProcessSummary, RunReport, SamplingSummary,
};

/// Result of one command before it is written out.
struct Outcome {
    report: RunReport,
    dist_csv: Option<String>,
    chi_csv: Option<String>,
}

fn base_report(exp: &Experiment, command: &str) -> RunReport {
    RunReport {
        command: command.into(),
        config: exp.config.clone(),
        tolerances: exp.tolerances,
        process: ProcessSummary::of(&exp.process),
        beta: exp.config.state.beta(),
        distribution: String::new(),
        total_weight: 1.0,
        min_weight: 0.0,
        moments: None,
        moment_identities: None,
        delta_f: None,
        jarzynski: None,
        inversion: None,
        pointer: None,
        sampling: None,
        warnings: Vec::new(),
        checks: Checks::default(),
        files: Vec::new(),
        passed: false,
    }
}

fn kind_name(kind: DistributionKind) -> String {
    match kind {
        DistributionKind::Probability => "probability".into(),
        DistributionKind::QuasiProbability => "quasi_probability".into(),
    }
}

fn dist_csv(d: &WorkDistribution) -> String {
    output::csv("w,weight", d.atoms().iter().map(|a| vec![a.w, a.weight]))
}

fn describe(report: &mut RunReport, d: &WorkDistribution) {
    report.distribution = kind_name(d.kind());
    report.total_weight = d.total_weight();
    report.min_weight = d.min_weight();
    report.moments = Some(Moments::of(d));
}

fn normalization_checks(report: &mut RunReport, d: &WorkDistribution) {
    let tol = report.tolerances;
    report.checks.at_most(
        "normalization",
        (d.total_weight() - 1.0).abs(),
        tol.normalization,
    );
    if d.kind() == DistributionKind::Probability {
        report
            .checks
            .not_below("nonnegative_weights", d.min_weight(), tol.negativity);
    }
}

fn chi_at_zero_check(report: &mut RunReport, chi: &CharacteristicFunctionSamples) {
    if let Some(k) = chi.lambdas.iter().position(|&l| l == 0.0) {
        let dev = (chi.values[k] - C64::new(1.0, 0.0)).norm();
        report.checks.at_most(
            "characteristic_at_zero",
            dev,
            report.tolerances.normalization,
        );
    }
}

fn thermal_checks(report: &mut RunReport, exp: &Experiment, d: &WorkDistribution) -> CliResult<()> {
    let Some(beta) = exp.config.state.beta() else {
        return Ok(());
    };
    let df = delta_f(exp.process.h0(), exp.process.ht(), beta)?;
    report.delta_f = Some(df);
    if d.kind() == DistributionKind::Probability {
        let j = jarzynski_check(d, beta, df)?;
        report.checks.at_most(
            "jarzynski_relative_deviation",
            j.relative_deviation,
            exp.tolerances.jarzynski,
        );
        report.jarzynski = Some(j);
    }
    Ok(())
}

fn moment_checks(report: &mut RunReport, exp: &Experiment) -> CliResult<()> {
    let m = moment_identities_check(&exp.state, &exp.process)?;
    report
        .checks
        .at_most("moment_identities", m.max_delta(), exp.tolerances.moments);
    report.moment_identities = Some(m);
    Ok(())
}

/// Recovers atoms from characteristic-function samples, either by least
/// squares on `support` or as a windowed density on a uniform work grid.
fn invert(
    exp: &Experiment,
    report: &mut RunReport,
    chi: &CharacteristicFunctionSamples,
    support: &[f64],
    kind: DistributionKind,
    check_residual: bool,
) -> CliResult<String> {
    match exp.config.inversion.mode {
        InversionMode::Support => {
            let inv = invert_characteristic(chi, support)?;
            if check_residual {
                report.checks.at_most(
                    "inversion_residual",
                    inv.residual_norm,
                    exp.tolerances.inversion_residual,
                );
            }
            report.inversion = Some(InversionSummary {
                mode: "support".into(),
                residual_norm: Some(inv.residual_norm),
                condition_number: Some(inv.condition_number),
            });
            let total: f64 = inv.weights.iter().sum();
            let min = inv.weights.iter().copied().fold(f64::INFINITY, f64::min);
            let mean: f64 = inv
                .support
                .iter()
                .zip(&inv.weights)
                .map(|(w, p)| w * p)
                .sum();
            let second: f64 = inv
                .support
                .iter()
                .zip(&inv.weights)
                .map(|(w, p)| w * w * p)
                .sum();
            report.distribution = kind_name(kind);
            report.total_weight = total;
            report.min_weight = min;
            report.moments = Some(Moments {
                mean,
                second,
                variance: second - mean * mean,
            });
            if check_residual {
                report.checks.at_most(
                    "normalization",
                    (total - 1.0).abs(),
                    exp.tolerances.normalization,
                );
            }
            if let Some(beta) = exp.config.state.beta() {
                let df = delta_f(exp.process.h0(), exp.process.ht(), beta)?;
                report.delta_f = Some(df);
            }
            Ok(output::two_columns("w,weight", &inv.support, &inv.weights))
        }
        InversionMode::Windowed => {
            let lo = support.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let margin = 0.25 * (hi - lo).max(1.0);
            let n = exp.config.inversion.points;
            let ws: Vec<f64> = (0..n)
                .map(|k| lo - margin + (hi - lo + 2.0 * margin) * k as f64 / (n - 1) as f64)
                .collect();
            let density = windowed_density(chi, &ws, exp.config.inversion.window)?;
            report.distribution = "windowed_density".into();
            report.inversion = Some(InversionSummary {
                mode: "windowed".into(),
                residual_norm: None,
                condition_number: None,
            });
            let h = ws[1] - ws[0];
            report.total_weight = density.iter().sum::<f64>() * h;
            report.min_weight = density.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(output::two_columns("w,density", &ws, &density))
        }
    }
}

fn detector(exp: &Experiment) -> CliResult<DetectorConfig> {
    exp.config
        .detector
        .ok_or_else(|| CliError::Validation("protocol needs a detector block".into()))
}

/// Symmetric grid reaching `±(max|shift| + 6σ)` around the pointer origin.
fn pointer_grid(process: &Process, cfg: &DetectorConfig, points: usize) -> Vec<f64> {
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let max_shift = et
        .iter()
        .flat_map(|ej| e0.iter().map(move |ei| (ej - ei).abs()))
        .fold(0.0_f64, f64::max)
        * cfg.shift_scale().abs();
    let reach = (max_shift + COVERAGE_SIGMAS * cfg.sigma) * (1.0 + 1e-12) + cfg.x0.abs();
    (0..points)
        .map(|k| -reach + 2.0 * reach * k as f64 / (points - 1) as f64)
        .collect()
}

fn pointer_summary(
    exp: &Experiment,
    cfg: &DetectorConfig,
    mixture: &GaussianMixture,
    min_density: f64,
) -> CliResult<PointerSummary> {
    let quasi = quasi_distribution(&exp.state, &exp.process)?;
    let (lo, hi) = mixture.center_range();
    let reach = 12.0 * mixture.sigma;
    let light_ancilla = match exp.config.state.beta() {
        Some(beta) => Some(light_ancilla_moments(
            &tmp_distribution(&exp.state, &exp.process)?,
            cfg.shift_scale(),
            cfg.sigma,
            beta,
        )?),
        None => None,
    };
    Ok(PointerSummary {
        shift_scale: cfg.shift_scale(),
        mean_dx: mixture.mean(),
        second_dx: mixture.second_moment(),
        mean_w_from_pointer: mixture.mean() / cfg.shift_scale(),
        quasi_mean_w: quasi.mean(),
        min_density,
        total_mass: mixture.cdf(hi + reach) - mixture.cdf(lo - reach),
        light_ancilla,
    })
}

fn run_outcome(exp: &Experiment) -> CliResult<Outcome> {
    let mut report = base_report(exp, "run");
    let tol = exp.tolerances;
    let (state, process, lambdas) = (&exp.state, &exp.process, &exp.lambdas);
    let (dist_csv_text, chi) = match exp.config.protocol {
        ProtocolSpec::Tmp => {
            let d = tmp_distribution(state, process)?;
            let chi = characteristic_function_tmp(state, process, lambdas)?;
            let ft = CharacteristicFunctionSamples::of_distribution(&d, lambdas);
            report.checks.at_most(
                "fourier_of_atoms_vs_characteristic",
                ft.max_deviation(&chi),
                tol.characteristic,
            );
            describe(&mut report, &d);
            normalization_checks(&mut report, &d);
            thermal_checks(&mut report, exp, &d)?;
            (dist_csv(&d), chi)
        }
        ProtocolSpec::Quasi => {
            let d = quasi_distribution(state, process)?;
            let g = g_lambda(state, process, lambdas)?;
            let ft = CharacteristicFunctionSamples::of_distribution(&d, lambdas);
            report.checks.at_most(
                "fourier_of_atoms_vs_characteristic",
                ft.max_deviation(&g),
                tol.characteristic,
            );
            describe(&mut report, &d);
            normalization_checks(&mut report, &d);
            moment_checks(&mut report, exp)?;
            thermal_checks(&mut report, exp, &d)?;
            (dist_csv(&d), g)
        }
        ProtocolSpec::Ramsey => {
            let outcomes = run_ramsey(state, process, lambdas)?;
            let chi = CharacteristicFunctionSamples {
                lambdas: lambdas.clone(),
                values: outcomes.iter().map(|o| o.chi).collect(),
            };
            let exact = two_time_correlation(state, process, lambdas)?;
            report.checks.at_most(
                "ramsey_vs_trace_formula",
                chi.max_deviation(&exact),
                tol.characteristic,
            );
            let text = invert(
                exp,
                &mut report,
                &chi,
                &tmp_support(process),
                DistributionKind::Probability,
                true,
            )?;
            (text, chi)
        }
        ProtocolSpec::PovmProtocol1 => {
            let cfg = detector(exp)?;
            report.warnings = joint_evolution(state, process, &cfg)?.warnings;
            let g = protocol1_g(state, process, &cfg, lambdas)?;
            let exact = g_lambda(state, process, lambdas)?;
            report.checks.at_most(
                "protocol1_vs_quasi_characteristic",
                g.max_deviation(&exact),
                tol.characteristic,
            );
            moment_checks(&mut report, exp)?;
            let text = invert(
                exp,
                &mut report,
                &g,
                &quasi_support(process),
                DistributionKind::QuasiProbability,
                true,
            )?;
            (text, g)
        }
        ProtocolSpec::PovmProtocol2 => {
            let cfg = detector(exp)?;
            report.warnings = joint_evolution(state, process, &cfg)?.warnings;
            let grid = pointer_grid(process, &cfg, exp.config.pdf_points);
            let pdf = protocol2_position_pdf(state, process, &cfg, &grid)?;
            let min_density = pdf.min_value();
            let summary = pointer_summary(exp, &cfg, &pdf.mixture, min_density)?;
            report.distribution = "pointer_density".into();
            report.total_weight = summary.total_mass;
            report.min_weight = min_density;
            report.checks.at_most(
                "pointer_mass",
                (summary.total_mass - 1.0).abs(),
                tol.normalization,
            );
            report
                .checks
                .not_below("pointer_density_nonnegative", min_density, tol.negativity);
            if state.is_incoherent(process, 1e-12)? {
                report.checks.at_most(
                    "pointer_mean_vs_scaled_quasi_mean",
                    (summary.mean_w_from_pointer - summary.quasi_mean_w).abs(),
                    tol.moments,
                );
            }
            if let Some(la) = &summary.light_ancilla {
                report.checks.at_most(
                    "light_ancilla_identities",
                    la.identity_deviation,
                    tol.moments,
                );
            }
            report.pointer = Some(summary);
            let g = g_lambda(state, process, lambdas)?;
            (output::two_columns("dx,density", &pdf.grid, &pdf.values), g)
        }
    };
    chi_at_zero_check(&mut report, &chi);
    Ok(Outcome {
        report,
        dist_csv: Some(dist_csv_text),
        chi_csv: Some(output::chi_csv(&chi.lambdas, &chi.values)),
    })
}

fn shot_spec(exp: &Experiment) -> CliResult<ShotSpec> {
    exp.config
        .shots
        .clone()
        .ok_or_else(|| CliError::Validation("sample needs a `shots` block in the config".into()))
}

/// Seed of the λ-th Ramsey setting, so that settings use unrelated streams.
fn setting_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn sample_outcome(exp: &Experiment) -> CliResult<Outcome> {
    let spec = shot_spec(exp)?;
    let mut report = base_report(exp, "sample");
    let tol = exp.tolerances;
    let (state, process, lambdas) = (&exp.state, &exp.process, &exp.lambdas);
    let mut sampling = SamplingSummary {
        shots: spec.shots,
        seed: spec.seed,
        estimates: None,
        chi_squared: None,
        jarzynski_estimate: None,
        jarzynski_standard_error: None,
        jarzynski_sample_standard_error: None,
        ks_statistic: None,
        ks_bound: None,
        max_abs_z: None,
    };
    let (dist_text, chi_text) = match exp.config.protocol {
        ProtocolSpec::Tmp => {
            let plan = ShotPlan::new(spec.shots, spec.seed, SamplingProtocol::Tmp)?;
            let s = sample_tmp(state, process, &plan)?;
            let exact = tmp_distribution(state, process)?;
            let by_work = s.counts_by_work(default_merge_tol(process));
            let n = spec.shots as f64;
            // Every possible work value, with its observed frequency.
            let rows: Vec<(f64, f64)> = by_work.iter().map(|&(w, c)| (w, c as f64 / n)).collect();
            let counts: Vec<u64> = exact
                .atoms()
                .iter()
                .map(|a| nearest_count(&by_work, a.w))
                .collect();
            let probs: Vec<f64> = exact.atoms().iter().map(|a| a.weight).collect();
            let chi2 = chi_squared_test(&counts, &probs, tol.chi_squared_confidence)?;
            report.checks.0.push(crate::report::Check {
                name: "chi_squared_vs_exact_weights".into(),
                value: chi2.statistic,
                tolerance: chi2.critical,
                pass: chi2.pass,
            });
            sampling.chi_squared = Some(chi2);
            let mean = s.report.estimate("mean_w").unwrap_or(f64::NAN);
            let se = s.report.standard_error("mean_w").unwrap_or(0.0);
            report.checks.at_most(
                "mean_w_standard_errors",
                z_score(mean - exact.mean(), se),
                tol.sampling_sigmas,
            );
            if let Some(beta) = exp.config.state.beta() {
                let df = delta_f(process.h0(), process.ht(), beta)?;
                let target = (-beta * df).exp();
                let (est, sample_se) = s.jarzynski_estimate(beta);
                let var = exact.exponential_average(2.0 * beta) - target * target;
                let se = (var.max(0.0) / n).sqrt();
                report.checks.at_most(
                    "jarzynski_standard_errors",
                    z_score(est - target, se),
                    tol.sampling_sigmas,
                );
                report.delta_f = Some(df);
                sampling.jarzynski_estimate = Some(est);
                sampling.jarzynski_standard_error = Some(se);
                sampling.jarzynski_sample_standard_error = Some(sample_se);
            }
            let observed = WorkDistribution::new(
                rows.iter().map(|&(w, weight)| Atom { w, weight }).collect(),
                DistributionKind::Probability,
                0.0,
            )?;
            describe(&mut report, &observed);
            let chi = CharacteristicFunctionSamples::of_distribution(&observed, lambdas);
            sampling.estimates = Some(s.report);
            let text = output::csv("w,weight", rows.iter().map(|&(w, p)| vec![w, p]));
            (text, Some(output::chi_csv(&chi.lambdas, &chi.values)))
        }
        ProtocolSpec::Ramsey => {
            let mut values = Vec::with_capacity(lambdas.len());
            let mut z2 = 0.0;
            let mut max_z: f64 = 0.0;
            let mut dof = 0usize;
            let exact = two_time_correlation(state, process, lambdas)?;
            for (k, &l) in lambdas.iter().enumerate() {
                let plan = ShotPlan::new(
                    spec.shots,
                    setting_seed(spec.seed, k),
                    SamplingProtocol::Ramsey,
                )?;
                let r = sample_ramsey(state, process, l, &plan)?;
                let re = r.estimate("chi_re").unwrap_or(f64::NAN);
                let im = r.estimate("chi_im").unwrap_or(f64::NAN);
                for (key, got, want) in [
                    ("chi_re", re, exact.values[k].re),
                    ("chi_im", im, exact.values[k].im),
                ] {
                    let se = r.standard_error(key).unwrap_or(0.0);
                    // Outcomes that are certain have zero spread.
                    if se > 0.0 {
                        let z = (got - want) / se;
                        z2 += z * z;
                        max_z = max_z.max(z.abs());
                        dof += 1;
                    }
                }
                values.push(C64::new(re, im));
            }
            if dof > 0 {
                let critical = ChiSquared::new(dof as f64)
                    .map_err(|e| CliError::Numerical(e.to_string()))?
                    .inverse_cdf(tol.chi_squared_confidence);
                report
                    .checks
                    .at_most("ramsey_sum_of_squared_z", z2, critical);
            }
            sampling.max_abs_z = Some(max_z);
            let chi = CharacteristicFunctionSamples {
                lambdas: lambdas.clone(),
                values,
            };
            let text = invert(
                exp,
                &mut report,
                &chi,
                &tmp_support(process),
                DistributionKind::Probability,
                false,
            )?;
            (text, Some(output::chi_csv(&chi.lambdas, &chi.values)))
        }
        ProtocolSpec::PovmProtocol2 => {
            let cfg = detector(exp)?;
            let plan = ShotPlan::new(spec.shots, spec.seed, SamplingProtocol::Protocol2)?;
            let s = sample_position(state, process, &cfg, &plan)?;
            let mixture = protocol2_mixture(state, process, &cfg)?;
            let sorted = s.sorted();
            let d = ks_statistic(&sorted, |x| mixture.cdf(x));
            let bound = ks_bound_99(sorted.len());
            report.checks.at_most("ks_statistic", d, bound);
            let mean = s.report.estimate("mean_dx").unwrap_or(f64::NAN);
            let se = s.report.standard_error("mean_dx").unwrap_or(0.0);
            report.checks.at_most(
                "mean_dx_standard_errors",
                z_score(mean - mixture.mean(), se),
                tol.sampling_sigmas,
            );
            sampling.ks_statistic = Some(d);
            sampling.ks_bound = Some(bound);
            sampling.estimates = Some(s.report.clone());
            let (centres, density) = histogram(&sorted, exp.config.histogram_bins);
            report.distribution = "pointer_density".into();
            report.total_weight = 1.0;
            report.min_weight = 0.0;
            report.pointer = Some(pointer_summary(exp, &cfg, &mixture, 0.0)?);
            (output::two_columns("dx,density", &centres, &density), None)
        }
        ProtocolSpec::Quasi | ProtocolSpec::PovmProtocol1 => {
            return Err(CliError::Validation(format!(
                "protocol {:?} has no shot mode; use tmp, ramsey or povm-protocol2",
                exp.config.protocol
            )))
        }
    };
    report.sampling = Some(sampling);
    Ok(Outcome {
        report,
        dist_csv: Some(dist_text),
        chi_csv: chi_text,
    })
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff.abs() / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn nearest_count(by_work: &[(f64, u64)], w: f64) -> u64 {
    by_work
        .iter()
        .min_by(|a, b| (a.0 - w).abs().total_cmp(&(b.0 - w).abs()))
        .map(|&(_, c)| c)
        .unwrap_or(0)
}

/// Normalised histogram over the sample range.
fn histogram(sorted: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0u64; bins];
    for &x in sorted {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = sorted.len() as f64;
    let centres = (0..bins).map(|k| lo + width * (k as f64 + 0.5)).collect();
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    (centres, density)
}

fn finish(exp: &Experiment, mut outcome: Outcome) -> CliResult<RunReport> {
    let dir = OutputDir(exp.config.out_dir.clone().into());
    if let Some(text) = &outcome.dist_csv {
        dir.write(DIST_FILE, text.as_bytes())?;
        outcome.report.files.push(DIST_FILE.into());
    }
    if let Some(text) = &outcome.chi_csv {
        dir.write(CHI_FILE, text.as_bytes())?;
        outcome.report.files.push(CHI_FILE.into());
    }
    outcome.report.files.push(REPORT_FILE.into());
    outcome.report.passed = outcome.report.checks.all_pass();
    dir.write(REPORT_FILE, &output::json(&outcome.report)?)?;
    Ok(outcome.report)
}

pub fn run(exp: &Experiment) -> CliResult<RunReport> {
    let outcome = run_outcome(exp)?;
    finish(exp, outcome)
}

pub fn sample(exp: &Experiment) -> CliResult<RunReport> {
    let outcome = sample_outcome(exp)?;
    finish(exp, outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Detector coupling time.
    Lambda,
    /// Pointer width.
    Sigma,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub command: String,
    pub config: crate::config::ResolvedConfig,
    pub tolerances: crate::config::Tolerances,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub checks: Checks,
    pub files: Vec<String>,
    pub passed: bool,
}

/// Re-runs a detector protocol over a grid of coupling times or widths.
/// Protocol 2 tabulates pointer moments and the smallest density; Protocol 1
/// tabulates the deviation of its readout from `G_λ`.
pub fn sweep(exp: &Experiment, param: SweepParam, values: &[f64]) -> CliResult<SweepReport> {
    let base = detector(exp)?;
    if values.is_empty() {
        return Err(CliError::Validation(
            "sweep needs at least one value".into(),
        ));
    }
    let tol = exp.tolerances;
    let mut checks = Checks::default();
    let configs: Vec<DetectorConfig> = values
        .iter()
        .map(|&v| {
            let cfg = match param {
                SweepParam::Lambda => base.with_lambda(v),
                SweepParam::Sigma => DetectorConfig { sigma: v, ..base },
            };
            cfg.validate().map(|_| cfg).map_err(CliError::from)
        })
        .collect::<CliResult<_>>()?;
    let text = match exp.config.protocol {
        ProtocolSpec::PovmProtocol2 => {
            let quasi = quasi_distribution(&exp.state, &exp.process)?;
            let incoherent = exp.state.is_incoherent(&exp.process, 1e-12)?;
            let mut rows = Vec::with_capacity(values.len());
            for (&v, cfg) in values.iter().zip(&configs) {
                let grid = pointer_grid(&exp.process, cfg, exp.config.pdf_points);
                let pdf = protocol2_position_pdf(&exp.state, &exp.process, cfg, &grid)?;
                let m = &pdf.mixture;
                let min = pdf.min_value();
                checks.not_below(
                    &format!("pointer_density_nonnegative@{v}"),
                    min,
                    tol.negativity,
                );
                let mean_w = m.mean() / cfg.shift_scale();
                if incoherent {
                    checks.at_most(
                        &format!("pointer_mean_vs_scaled_quasi_mean@{v}"),
                        (mean_w - quasi.mean()).abs(),
                        tol.moments,
                    );
                }
                rows.push(vec![v, m.mean(), m.second_moment(), mean_w, min]);
            }
            output::csv("value,mean_dx,second_dx,mean_w,min_density", rows)
        }
        ProtocolSpec::PovmProtocol1 => {
            let exact = g_lambda(&exp.state, &exp.process, &exp.lambdas)?;
            let mut rows = Vec::with_capacity(values.len());
            for (&v, cfg) in values.iter().zip(&configs) {
                let g = protocol1_g(&exp.state, &exp.process, cfg, &exp.lambdas)?;
                let dev = g.max_deviation(&exact);
                checks.at_most(
                    &format!("protocol1_vs_quasi_characteristic@{v}"),
                    dev,
                    tol.characteristic,
                );
                rows.push(vec![v, dev]);
            }
            output::csv("value,g_max_deviation", rows)
        }
        other => {
            return Err(CliError::Validation(format!(
                "sweep needs a detector protocol, got {other:?}"
            )))
        }
    };
    let dir = OutputDir(exp.config.out_dir.clone().into());
    dir.write(SWEEP_FILE, text.as_bytes())?;
    let report = SweepReport {
        command: "sweep".into(),
        config: exp.config.clone(),
        tolerances: tol,
        param,
        values: values.to_vec(),
        passed: checks.all_pass(),
        checks,
        files: vec![SWEEP_FILE.into(), REPORT_FILE.into()],
    };
    dir.write(REPORT_FILE, &output::json(&report)?)?;
    Ok(report)
}
