//! Experiment configuration: JSON schema, defaults and resolution into
//! library objects.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use num_complex::Complex64 as C64;
use qwork_core::detector::DetectorConfig;
use qwork_core::models::{CollectiveSpinModel, Direction, NmrModel, DEFAULT_STEPS_PER_SEGMENT};
use qwork_core::quantum::{check_hermitian, check_unitary, Ket, Operator};
use qwork_core::work::{lambda_grid, suggest_lambda_grid, Window};
use qwork_core::{InitialState, Process};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Upper bound on automatically chosen λ grids.
pub const AUTO_GRID_POINTS: usize = 4096;

/// A matrix or vector entry: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type Matrix = Vec<Vec<Entry>>;

fn to_operator(name: &str, rows: &Matrix) -> CliResult<Operator> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Validation(format!("{name}: empty matrix")));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(CliError::Validation(format!(
            "{name}: matrix must be square, row {bad} has {} entries for {n} rows",
            rows[bad].len()
        )));
    }
    Ok(Operator::from_fn(n, n, |i, j| rows[i][j].value()))
}

fn hermitian(name: &str, rows: &Matrix) -> CliResult<Operator> {
    let h = to_operator(name, rows)?;
    check_hermitian(&h).map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    Ok(h)
}

fn default_nu1() -> f64 {
    1.0
}
fn default_nu2() -> f64 {
    1.8
}
fn default_one() -> f64 {
    1.0
}
fn default_alpha_t() -> f64 {
    FRAC_PI_2
}
fn default_duration() -> f64 {
    2.0
}
fn default_direction() -> Direction {
    Direction::Forward
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Qubit in a rotating field with a linear amplitude ramp.
    Nmr {
        #[serde(default = "default_nu1")]
        nu1: f64,
        #[serde(default = "default_nu2")]
        nu2: f64,
        #[serde(default = "default_one")]
        tau: f64,
        #[serde(default = "default_direction")]
        direction: Direction,
    },
    CollectiveSpin {
        j: f64,
        #[serde(default = "default_one")]
        gamma_b: f64,
        #[serde(default)]
        alpha0: f64,
        #[serde(default = "default_alpha_t")]
        alpha_t: f64,
        #[serde(default = "default_duration")]
        duration: f64,
        /// Rotate the field instantaneously instead of ramping it.
        #[serde(default)]
        sudden: bool,
    },
    SuddenQuench {
        h0: Matrix,
        ht: Matrix,
    },
    Custom {
        h0: Matrix,
        ht: Matrix,
        u: Matrix,
    },
}

impl ModelSpec {
    pub fn process(&self, steps: usize) -> CliResult<Process> {
        let p = match self {
            ModelSpec::Nmr {
                nu1,
                nu2,
                tau,
                direction,
            } => NmrModel::new(*nu1, *nu2, *tau, *direction)?.process(steps)?,
            ModelSpec::CollectiveSpin {
                j,
                gamma_b,
                alpha0,
                alpha_t,
                duration,
                sudden,
            } => {
                let m = CollectiveSpinModel {
                    gamma_b: *gamma_b,
                    alpha0: *alpha0,
                    alpha_t: *alpha_t,
                    j: *j,
                    duration: *duration,
                };
                if *sudden {
                    m.sudden_process()?
                } else {
                    m.process(steps)?
                }
            }
            ModelSpec::SuddenQuench { h0, ht } => {
                Process::sudden(hermitian("model.h0", h0)?, hermitian("model.ht", ht)?)?
            }
            ModelSpec::Custom { h0, ht, u } => {
                let u = to_operator("model.u", u)?;
                check_unitary(&u).map_err(|e| CliError::Validation(format!("model.u: {e}")))?;
                Process::new(hermitian("model.h0", h0)?, hermitian("model.ht", ht)?, u)?
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    /// Gibbs state of the initial Hamiltonian.
    Thermal {
        beta: f64,
    },
    Ground,
    /// State vector in the computational basis.
    Pure {
        vector: Vec<Entry>,
    },
    Density {
        matrix: Matrix,
    },
}

impl StateSpec {
    pub fn state(&self) -> CliResult<InitialState> {
        let s = match self {
            StateSpec::Thermal { beta } => InitialState::thermal(*beta)?,
            StateSpec::Ground => InitialState::Ground,
            StateSpec::Pure { vector } => InitialState::pure(Ket::from_iterator(
                vector.len(),
                vector.iter().map(|e| e.value()),
            ))?,
            StateSpec::Density { matrix } => {
                InitialState::density(to_operator("state.matrix", matrix)?)?
            }
        };
        Ok(s)
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            StateSpec::Thermal { beta } => Some(*beta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolSpec {
    Tmp,
    Ramsey,
    PovmProtocol1,
    PovmProtocol2,
    Quasi,
}

impl ProtocolSpec {
    pub fn needs_detector(self) -> bool {
        matches!(
            self,
            ProtocolSpec::PovmProtocol1 | ProtocolSpec::PovmProtocol2
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values {
        values: Vec<f64>,
    },
    Uniform {
        #[serde(default)]
        start: f64,
        step: f64,
        count: usize,
    },
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Values { values } => values.clone(),
            GridSpec::Uniform { start, step, count } => lambda_grid(*start, *step, *count),
        }
    }

    fn validate(&self, name: &str) -> CliResult<()> {
        let pts = self.points();
        if pts.is_empty() {
            return Err(CliError::Validation(format!("{name}: grid is empty")));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Validation(format!(
                "{name}: non-finite grid point"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSpec {
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InversionMode {
    /// Least squares on the known candidate support.
    Support,
    /// Windowed Fourier transform on a uniform grid, as an experiment
    /// sampling a finite λ window would see it.
    Windowed,
}

fn default_inversion_mode() -> InversionMode {
    InversionMode::Support
}
fn default_window() -> Window {
    Window::Hann
}
fn default_density_points() -> usize {
    801
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSpec {
    #[serde(default = "default_inversion_mode")]
    pub mode: InversionMode,
    #[serde(default = "default_window")]
    pub window: Window,
    /// Number of work values for the windowed density.
    #[serde(default = "default_density_points")]
    pub points: usize,
}

impl Default for InversionSpec {
    fn default() -> Self {
        InversionSpec {
            mode: default_inversion_mode(),
            window: default_window(),
            points: default_density_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    #[default]
    Default,
}

/// Every threshold a run or verify compares against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    pub profile: ToleranceProfile,
    /// `|Σ weights − 1|`.
    pub normalization: f64,
    /// Most negative weight accepted for a probability distribution, and
    /// most negative pointer density.
    pub negativity: f64,
    /// Pointwise agreement between two routes to a characteristic function.
    pub characteristic: f64,
    /// Least-squares residual norm of an inversion on the support.
    pub inversion_residual: f64,
    /// First- and second-moment identities.
    pub moments: f64,
    /// Relative deviation of `⟨e^{−βW}⟩` from `e^{−βΔF}`.
    pub jarzynski: f64,
    /// `|slope − β|` and `|ΔF_fit − ΔF|` for exact distributions.
    pub crooks: f64,
    /// Allowed deviation in standard errors for shot-based estimates.
    pub sampling_sigmas: f64,
    /// Confidence level of chi-squared tests on shot counts.
    pub chi_squared_confidence: f64,
}

impl Tolerances {
    pub fn for_profile(profile: ToleranceProfile) -> Self {
        match profile {
            ToleranceProfile::Default => Tolerances {
                profile,
                normalization: 1e-9,
                negativity: 1e-12,
                characteristic: 1e-10,
                inversion_residual: 1e-8,
                moments: 1e-8,
                jarzynski: 1e-10,
                crooks: 1e-9,
                sampling_sigmas: 4.0,
                chi_squared_confidence: 0.99,
            },
            ToleranceProfile::Strict => Tolerances {
                profile,
                normalization: 1e-12,
                negativity: 1e-14,
                characteristic: 1e-12,
                inversion_residual: 1e-10,
                moments: 1e-10,
                jarzynski: 1e-12,
                crooks: 1e-10,
                sampling_sigmas: 3.0,
                chi_squared_confidence: 0.999,
            },
        }
    }
}

fn default_pdf_points() -> usize {
    2001
}
fn default_histogram_bins() -> usize {
    200
}

/// Config file as written by the user.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub state: StateSpec,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub lambda_grid: Option<GridSpec>,
    #[serde(default)]
    pub shots: Option<ShotSpec>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub inversion: Option<InversionSpec>,
    /// Number of points on which the pointer density is tabulated.
    #[serde(default)]
    pub pdf_points: Option<usize>,
    #[serde(default)]
    pub histogram_bins: Option<usize>,
    #[serde(default)]
    pub tolerance_profile: Option<ToleranceProfile>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// Command-line settings that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub out_dir: Option<String>,
    pub tolerance_profile: Option<ToleranceProfile>,
}

/// Config with every default filled in, as echoed in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub model: ModelSpec,
    pub state: StateSpec,
    pub protocol: ProtocolSpec,
    pub detector: Option<DetectorConfig>,
    pub lambda_grid: GridSpec,
    pub shots: Option<ShotSpec>,
    pub steps: usize,
    pub inversion: InversionSpec,
    pub pdf_points: usize,
    pub histogram_bins: usize,
    pub tolerance_profile: ToleranceProfile,
    pub out_dir: String,
}

pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Everything a command needs: the resolved config and the objects built
/// from it.
pub struct Experiment {
    pub config: ResolvedConfig,
    pub process: Process,
    pub state: InitialState,
    pub lambdas: Vec<f64>,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn resolve(self, overrides: &Overrides) -> CliResult<Experiment> {
        let steps = overrides
            .steps
            .or(self.steps)
            .unwrap_or(DEFAULT_STEPS_PER_SEGMENT);
        if steps == 0 {
            return Err(CliError::Validation("steps must be at least 1".into()));
        }
        let process = self.model.process(steps)?;
        let state = self.state.state()?;
        state.to_density(&process)?;

        if self.protocol.needs_detector() && self.detector.is_none() {
            return Err(CliError::Validation(format!(
                "protocol {:?} needs a detector block",
                self.protocol
            )));
        }
        if let Some(d) = &self.detector {
            d.validate()?;
        }

        let lambda_grid = match self.lambda_grid {
            Some(g) => {
                g.validate("lambda_grid")?;
                g
            }
            None => {
                let support = match self.protocol {
                    ProtocolSpec::Quasi
                    | ProtocolSpec::PovmProtocol1
                    | ProtocolSpec::PovmProtocol2 => qwork_core::work::quasi_support(&process),
                    ProtocolSpec::Tmp | ProtocolSpec::Ramsey => {
                        qwork_core::work::tmp_support(&process)
                    }
                };
                let pts = suggest_lambda_grid(&support, AUTO_GRID_POINTS);
                let step = if pts.len() > 1 { pts[1] - pts[0] } else { 1.0 };
                GridSpec::Uniform {
                    start: 0.0,
                    step,
                    count: pts.len(),
                }
            }
        };

        let mut shots = self.shots;
        if let (Some(s), Some(seed)) = (shots.as_mut(), overrides.seed) {
            s.seed = seed;
        }
        if let Some(s) = &shots {
            if s.shots == 0 {
                return Err(CliError::Validation("shots must be at least 1".into()));
            }
        }

        let inversion = self.inversion.unwrap_or_default();
        if inversion.points < 2 {
            return Err(CliError::Validation(
                "inversion.points must be at least 2".into(),
            ));
        }
        let pdf_points = self.pdf_points.unwrap_or_else(default_pdf_points);
        let histogram_bins = self.histogram_bins.unwrap_or_else(default_histogram_bins);
        if pdf_points < 2 || histogram_bins < 1 {
            return Err(CliError::Validation(
                "pdf_points must be at least 2 and histogram_bins at least 1".into(),
            ));
        }
        let tolerance_profile = overrides
            .tolerance_profile
            .or(self.tolerance_profile)
            .unwrap_or_default();
        let out_dir = overrides
            .out_dir
            .clone()
            .or(self.out_dir)
            .unwrap_or_else(|| ".".into());

        let lambdas = lambda_grid.points();
        Ok(Experiment {
            config: ResolvedConfig {
                model: self.model,
                state: self.state,
                protocol: self.protocol,
                detector: self.detector,
                lambda_grid,
                shots,
                steps,
                inversion,
                pdf_points,
                histogram_bins,
                tolerance_profile,
                out_dir,
            },
            process,
            state,
            lambdas,
            tolerances: Tolerances::for_profile(tolerance_profile),
        })
    }
}
