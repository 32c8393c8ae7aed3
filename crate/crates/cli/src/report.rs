use qwork_core::detector::LightAncillaReport;
use qwork_core::sampling::{ChiSquaredResult, EstimateReport};
use qwork_core::work::{CrooksReport, JarzynskiReport, MomentReport, WorkDistribution};
use qwork_core::Process;
use serde::{Deserialize, Serialize};

use crate::config::{ResolvedConfig, Tolerances};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    /// Passes when `value <= tolerance`.
    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        });
    }

    /// Passes when `value >= -tolerance`.
    pub fn not_below(&mut self, name: &str, value: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.into(),
            value,
            tolerance,
            pass: value >= -tolerance,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.0.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessSummary {
    pub dim: usize,
    pub initial_energies: Vec<f64>,
    pub final_energies: Vec<f64>,
}

impl ProcessSummary {
    pub fn of(p: &Process) -> Self {
        ProcessSummary {
            dim: p.dim(),
            initial_energies: p.initial_spectrum().basis_energies(),
            final_energies: p.final_spectrum().basis_energies(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second: f64,
    pub variance: f64,
}

impl Moments {
    pub fn of(d: &WorkDistribution) -> Self {
        let mean = d.moment(1);
        let second = d.moment(2);
        Moments {
            mean,
            second,
            variance: second - mean * mean,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointerSummary {
    /// `λ/p₀`: pointer displacement per unit work.
    pub shift_scale: f64,
    pub mean_dx: f64,
    pub second_dx: f64,
    /// `mean_dx / shift_scale`.
    pub mean_w_from_pointer: f64,
    pub quasi_mean_w: f64,
    pub min_density: f64,
    pub total_mass: f64,
    pub light_ancilla: Option<LightAncillaReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionSummary {
    pub mode: String,
    pub residual_norm: Option<f64>,
    pub condition_number: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingSummary {
    pub shots: u64,
    pub seed: u64,
    pub estimates: Option<EstimateReport>,
    pub chi_squared: Option<ChiSquaredResult>,
    /// Shot estimate of `⟨e^{−βW}⟩`.
    pub jarzynski_estimate: Option<f64>,
    /// Standard error from the exact distribution.
    pub jarzynski_standard_error: Option<f64>,
    pub jarzynski_sample_standard_error: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub ks_bound: Option<f64>,
    /// Largest |z| over the per-λ Ramsey estimates.
    pub max_abs_z: Option<f64>,
}

/// `report.json` of `run` and `sample`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ResolvedConfig,
    pub tolerances: Tolerances,
    pub process: ProcessSummary,
    pub beta: Option<f64>,
    /// `probability`, `quasi_probability` or `pointer_density`.
    pub distribution: String,
    pub total_weight: f64,
    /// Most negative weight; below zero witnesses non-classical statistics.
    pub min_weight: f64,
    pub moments: Option<Moments>,
    pub moment_identities: Option<MomentReport>,
    pub delta_f: Option<f64>,
    pub jarzynski: Option<JarzynskiReport>,
    pub inversion: Option<InversionSummary>,
    pub pointer: Option<PointerSummary>,
    pub sampling: Option<SamplingSummary>,
    pub warnings: Vec<String>,
    pub checks: Checks,
    pub files: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegSummary {
    pub source: String,
    pub protocol: String,
    pub sampled: bool,
    pub shots: Option<u64>,
    pub atoms: usize,
    pub mean: f64,
    pub jarzynski: JarzynskiReport,
    /// Largest mismatch between numbers recomputed from the CSV and those in
    /// the leg's report.
    pub roundtrip_deviation: f64,
}

/// `report.json` of `verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub command: String,
    pub beta: f64,
    pub tolerances: Tolerances,
    pub forward: LegSummary,
    pub backward: LegSummary,
    pub crooks: CrooksReport,
    pub fitted_beta: f64,
    pub fitted_delta_f: f64,
    pub fitted_delta_f_se: f64,
    /// `−(1/β) ln(Z_T/Z_0)` from the forward endpoint spectra.
    pub delta_f: f64,
    /// Closed form for the qubit ramp, when the forward model is one.
    pub delta_f_closed_form: Option<f64>,
    pub checks: Checks,
    pub passed: bool,
}
