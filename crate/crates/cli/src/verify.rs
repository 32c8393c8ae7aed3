//! `verify`: Crooks and Jarzynski checks from a forward and a backward result.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use qwork_core::models::Direction;
use qwork_core::quantum::diag;
use qwork_core::work::{
    crooks_check, crooks_check_sampled, delta_f, jarzynski_check, Atom, DistributionKind,
    WorkDistribution,
};

use crate::config::{ModelSpec, Tolerances};
use crate::error::{CliError, CliResult};
use crate::output::{self, OutputDir, DIST_FILE, REPORT_FILE};
use crate::report::{Checks, LegSummary, RunReport, VerifyReport};

/// Relative slack when comparing β values and endpoint spectra.
const MATCH_TOL: f64 = 1e-12;

struct Leg {
    report: RunReport,
    dist: WorkDistribution,
    source: String,
}

impl Leg {
    fn sampled(&self) -> bool {
        self.report.sampling.is_some()
    }

    fn shots(&self) -> Option<u64> {
        self.report.sampling.as_ref().map(|s| s.shots)
    }
}

/// Accepts a result directory or the path of its `report.json`.
fn locate(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.join(REPORT_FILE), path.join(DIST_FILE))
    } else {
        let dir = path.parent().unwrap_or(Path::new("."));
        (path.to_path_buf(), dir.join(DIST_FILE))
    }
}

fn load_leg(path: &Path, name: &str) -> CliResult<Leg> {
    let (report_path, dist_path) = locate(path);
    let text = fs::read_to_string(&report_path).map_err(|e| CliError::io(&report_path, e))?;
    let report: RunReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", report_path.display())))?;
    if report.distribution != "probability" {
        return Err(CliError::Validation(format!(
            "{name} result holds a {} distribution; verify needs two-measurement work statistics",
            report.distribution
        )));
    }
    let rows = output::read_csv(&dist_path, "w,weight")?;
    let dist = WorkDistribution::new(
        rows.iter()
            .map(|r| Atom {
                w: r[0],
                weight: r[1],
            })
            .collect(),
        DistributionKind::Probability,
        0.0,
    )
    .map_err(|e| CliError::Validation(format!("{}: {e}", dist_path.display())))?;
    Ok(Leg {
        report,
        dist,
        source: path.display().to_string(),
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

fn leg_beta(leg: &Leg, name: &str) -> CliResult<f64> {
    leg.report.beta.ok_or_else(|| {
        CliError::Validation(format!("{name} result does not start from a thermal state"))
    })
}

/// Closed form for the qubit ramp: eigenvalues `±2πν`, so
/// `ΔF = −(1/β) ln[cosh(2πν_T β)/cosh(2πν_0 β)]`.
fn qubit_ramp_delta_f(model: &ModelSpec, beta: f64) -> Option<f64> {
    match model {
        ModelSpec::Nmr {
            nu1,
            nu2,
            direction,
            ..
        } => {
            let (start, end) = match direction {
                Direction::Forward => (*nu1, *nu2),
                Direction::Backward => (*nu2, *nu1),
            };
            let log_cosh =
                |x: f64| x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
            let (a, b) = (2.0 * PI * start * beta, 2.0 * PI * end * beta);
            Some(-(log_cosh(b) - log_cosh(a)) / beta)
        }
        _ => None,
    }
}

fn summarize(leg: &Leg, beta: f64, df: f64) -> CliResult<LegSummary> {
    let jarzynski = jarzynski_check(&leg.dist, beta, df)?;
    let mean = leg.dist.mean();
    let mut roundtrip = (leg.report.total_weight - leg.dist.total_weight()).abs();
    if let Some(m) = &leg.report.moments {
        roundtrip = roundtrip.max((m.mean - mean).abs());
    }
    // Zero-count rows of a sampled leg are dropped on reload, so its
    // minimum weight is not comparable.
    if !leg.sampled() {
        roundtrip = roundtrip.max((leg.report.min_weight - leg.dist.min_weight()).abs());
    }
    if let Some(j) = &leg.report.jarzynski {
        roundtrip = roundtrip.max((j.mean_exp - jarzynski.mean_exp).abs());
    }
    Ok(LegSummary {
        source: leg.source.clone(),
        protocol: format!("{:?}", leg.report.config.protocol).to_lowercase(),
        sampled: leg.sampled(),
        shots: leg.shots(),
        atoms: leg.dist.len(),
        mean,
        jarzynski,
        roundtrip_deviation: roundtrip,
    })
}

pub fn verify(
    forward_path: &Path,
    backward_path: &Path,
    beta: Option<f64>,
    tolerances: Tolerances,
    out_dir: &Path,
) -> CliResult<VerifyReport> {
    let fwd = load_leg(forward_path, "forward")?;
    let bwd = load_leg(backward_path, "backward")?;
    let (bf, bb) = (leg_beta(&fwd, "forward")?, leg_beta(&bwd, "backward")?);
    if !close(bf, bb) {
        return Err(CliError::Validation(format!(
            "mismatched beta: forward {bf}, backward {bb}"
        )));
    }
    if let Some(b) = beta {
        if !close(b, bf) {
            return Err(CliError::Validation(format!(
                "mismatched beta: requested {b}, results use {bf}"
            )));
        }
    }
    let beta = bf;

    let (e0, et) = (
        &fwd.report.process.initial_energies,
        &fwd.report.process.final_energies,
    );
    let df = delta_f(&diag(e0), &diag(et), beta)?;
    let mut checks = Checks::default();
    let swapped = |a: &[f64], b: &[f64]| {
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let endpoint_dev = swapped(et, &bwd.report.process.initial_energies)
        .max(swapped(e0, &bwd.report.process.final_energies));
    let scale = e0.iter().chain(et).fold(1.0_f64, |m, e| m.max(e.abs()));
    checks.at_most(
        "backward_endpoints_swap_forward",
        endpoint_dev,
        1e-9 * scale,
    );

    let sampled = fwd.sampled() || bwd.sampled();
    let crooks = if sampled {
        crooks_check_sampled(
            &fwd.dist,
            &bwd.dist,
            beta,
            fwd.shots().unwrap_or(u64::MAX),
            bwd.shots().unwrap_or(u64::MAX),
        )
        .map_err(|e| {
            CliError::Numerical(format!(
                "Crooks fit on shot data: {e}; too few work values were observed in both legs"
            ))
        })?
    } else {
        crooks_check(&fwd.dist, &bwd.dist, beta)?
    };
    if sampled {
        checks.at_most(
            "crooks_slope_standard_errors",
            (crooks.slope - beta).abs() / crooks.slope_se,
            tolerances.sampling_sigmas,
        );
        checks.at_most(
            "crooks_delta_f_standard_errors",
            (crooks.delta_f - df).abs() / crooks.delta_f_se,
            tolerances.sampling_sigmas,
        );
    } else {
        checks.at_most(
            "crooks_slope_minus_beta",
            (crooks.slope - beta).abs(),
            tolerances.crooks,
        );
        checks.at_most(
            "crooks_delta_f",
            (crooks.delta_f - df).abs(),
            tolerances.crooks,
        );
    }

    let forward = summarize(&fwd, beta, df)?;
    let backward = summarize(&bwd, beta, -df)?;
    for (name, leg) in [("forward", &forward), ("backward", &backward)] {
        checks.at_most(
            &format!("{name}_roundtrip"),
            leg.roundtrip_deviation,
            tolerances.normalization,
        );
        if !leg.sampled {
            checks.at_most(
                &format!("{name}_jarzynski_relative_deviation"),
                leg.jarzynski.relative_deviation,
                tolerances.jarzynski,
            );
        }
    }

    let delta_f_closed_form = qubit_ramp_delta_f(&fwd.report.config.model, beta);
    if let Some(cf) = delta_f_closed_form {
        checks.at_most(
            "delta_f_vs_qubit_ramp_closed_form",
            (cf - df).abs(),
            tolerances.crooks * df.abs().max(1.0),
        );
    }

    let report = VerifyReport {
        command: "verify".into(),
        beta,
        tolerances,
        forward,
        backward,
        fitted_beta: crooks.slope,
        fitted_delta_f: crooks.delta_f,
        fitted_delta_f_se: crooks.delta_f_se,
        crooks,
        delta_f: df,
        delta_f_closed_form,
        passed: checks.all_pass(),
        checks,
    };
    OutputDir(out_dir.to_path_buf()).write(REPORT_FILE, &output::json(&report)?)?;
    Ok(report)
}
