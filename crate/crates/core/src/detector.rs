//! Continuous-variable Gaussian detector.
//!
//! The detector is kept analytic: after the entangling sequence every
//! system branch `(i → j)` carries the initial wavepacket translated by
//! `s_ji = λ(ε_j^T − ε_i^0)/p₀`. Positive work moves the pointer towards
//! positive `Δx`. Grids only appear when a density is sampled for output.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::process::Process;
use crate::quantum::Operator;
use crate::state::InitialState;
use crate::work::{
    default_merge_tol, Atom, CharacteristicFunctionSamples, DistributionKind, WorkDistribution,
    QUASI_IMAG_TOL,
};

/// Pointer half-widths of margin a sampling grid must leave beyond the
/// largest shift.
pub const COVERAGE_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Coupling time λ.
    pub lambda: f64,
    pub p0: f64,
    /// Position width σ of `g(x) ∝ exp(−(x − x₀)²/4σ²)`.
    pub sigma: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub mass: Option<f64>,
    /// Free evolution time between the two couplings.
    #[serde(default)]
    pub free_time: Option<f64>,
    #[serde(default)]
    pub include_kinetic_phase: bool,
}

impl DetectorConfig {
    pub fn new(lambda: f64, p0: f64, sigma: f64) -> Result<Self> {
        let cfg = DetectorConfig {
            lambda,
            p0,
            sigma,
            x0: 0.0,
            mass: None,
            free_time: None,
            include_kinetic_phase: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_kinetic_phase(mut self, mass: f64, free_time: f64) -> Result<Self> {
        self.mass = Some(mass);
        self.free_time = Some(free_time);
        self.include_kinetic_phase = true;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.lambda.is_finite() || !self.x0.is_finite() {
            return bad("detector lambda and x0 must be finite".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!(
                "detector sigma must be positive, got {}",
                self.sigma
            ));
        }
        if self.p0 == 0.0 || !self.p0.is_finite() {
            return bad(format!("detector p0 must be nonzero, got {}", self.p0));
        }
        if self.include_kinetic_phase {
            match (self.mass, self.free_time) {
                (Some(m), Some(t)) if m > 0.0 && t >= 0.0 && m.is_finite() && t.is_finite() => {}
                _ => return bad("kinetic phase needs mass > 0 and free_time >= 0".into()),
            }
        }
        Ok(())
    }

    /// `λ/p₀`, the pointer displacement per unit work.
    pub fn shift_scale(&self) -> f64 {
        self.lambda / self.p0
    }

    /// Momentum width `1/(2σ)` of the initial wavepacket.
    pub fn momentum_width(&self) -> f64 {
        0.5 / self.sigma
    }

    /// `p_max² T/(2m)` with `p_max = 3σ_p`, i.e. `9T/(8mσ²)`; the kinetic
    /// phase is negligible when this is small.
    pub fn kinetic_validity(&self) -> Option<f64> {
        match (self.mass, self.free_time) {
            (Some(m), Some(t)) if self.include_kinetic_phase => {
                let pmax = 3.0 * self.momentum_width();
                Some(pmax * pmax * t / (2.0 * m))
            }
            _ => None,
        }
    }

    fn kinetic_phase(&self, p: f64) -> C64 {
        match (self.mass, self.free_time) {
            (Some(m), Some(t)) if self.include_kinetic_phase => {
                C64::from_polar(1.0, -p * p * t / (2.0 * m))
            }
            _ => C64::new(1.0, 0.0),
        }
    }

    /// Momentum amplitude `G(p)` of the initial wavepacket.
    fn momentum_amplitude(&self, p: f64) -> C64 {
        let s2 = self.sigma * self.sigma;
        let norm = (2.0 * s2 / std::f64::consts::PI).powf(0.25);
        C64::from_polar(norm * (-s2 * p * p).exp(), -p * self.x0)
    }
}

/// One pointer branch: system transition `i → j` with amplitude `U_ji` and
/// pointer translation `shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub i: usize,
    pub j: usize,
    pub amplitude: C64,
    pub shift: f64,
    pub width: f64,
}

/// `⟨g_a|g_b⟩` for real Gaussians of width σ translated by `a` and `b`.
fn overlap(a: f64, b: f64, sigma: f64) -> f64 {
    (-(a - b).powi(2) / (8.0 * sigma * sigma)).exp()
}

/// Joint system ⊗ detector state after the coupling sequence, in component
/// form: `Σ ρ_ik a_ij a*_kl |ε_j⟩⟨ε_l| ⊗ |g_ij⟩⟨g_kl|`.
#[derive(Debug, Clone)]
pub struct GaussianDetectorState {
    pub cfg: DetectorConfig,
    /// Initial system state in the initial energy basis.
    pub rho0: Operator,
    /// Components indexed `i · n + j`.
    pub components: Vec<GaussianComponent>,
    pub warnings: Vec<String>,
}

impl GaussianDetectorState {
    pub fn dim(&self) -> usize {
        self.rho0.nrows()
    }

    fn component(&self, i: usize, j: usize) -> &GaussianComponent {
        &self.components[i * self.dim() + j]
    }

    /// Reduced system state in the final energy basis.
    pub fn system_state(&self) -> Operator {
        let n = self.dim();
        let sigma = self.cfg.sigma;
        Operator::from_fn(n, n, |j, l| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                let a = self.component(i, j);
                for k in 0..n {
                    let b = self.component(k, l);
                    acc += self.rho0[(i, k)]
                        * a.amplitude
                        * b.amplitude.conj()
                        * overlap(a.shift, b.shift, sigma);
                }
            }
            acc
        })
    }

    /// Trace of the joint state.
    pub fn norm(&self) -> f64 {
        self.system_state().trace().re
    }

    /// `⟨p|ρ_D|p'⟩`.
    pub fn momentum_element(&self, p: f64, p_prime: f64) -> C64 {
        let n = self.dim();
        let cfg = &self.cfg;
        let envelope = cfg.momentum_amplitude(p)
            * cfg.momentum_amplitude(p_prime).conj()
            * cfg.kinetic_phase(p)
            * cfg.kinetic_phase(p_prime).conj();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let a = self.component(i, j);
                let left = a.amplitude * C64::from_polar(1.0, -p * a.shift);
                for k in 0..n {
                    let b = self.component(k, j);
                    let right = (b.amplitude * C64::from_polar(1.0, -p_prime * b.shift)).conj();
                    acc += self.rho0[(i, k)] * left * right;
                }
            }
        }
        acc * envelope
    }

    /// Pointer density `P(Δx)` as `Σ_j w_j† ρ w_j` with
    /// `w_{j,i} = conj(U_ji) g(Δx − s_ji)`; manifestly nonnegative.
    pub fn position_density_positive_form(&self, dx: f64) -> f64 {
        let n = self.dim();
        let sigma = self.cfg.sigma;
        let g = |y: f64| {
            (-(y * y) / (4.0 * sigma * sigma)).exp()
                / (2.0 * std::f64::consts::PI * sigma * sigma).powf(0.25)
        };
        let mut total = 0.0;
        for j in 0..n {
            let w: Vec<C64> = (0..n)
                .map(|i| {
                    let a = self.component(i, j);
                    a.amplitude.conj() * g(dx - a.shift)
                })
                .collect();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for k in 0..n {
                    acc += w[i].conj() * self.rho0[(i, k)] * w[k];
                }
            }
            total += acc.re;
        }
        total
    }
}

/// Couples the detector to the system, lets the process act, and couples
/// again.
pub fn joint_evolution(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
) -> Result<GaussianDetectorState> {
    cfg.validate()?;
    let rho0 = state.energy_basis_matrix(process)?;
    let amp = process.transition_amplitudes();
    let e0 = process.initial_spectrum().basis_energies();
    let et = process.final_spectrum().basis_energies();
    let n = process.dim();
    let scale = cfg.shift_scale();
    let tol = default_merge_tol(process);

    let mut components = Vec::with_capacity(n * n);
    let mut warnings = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let work = et[j] - e0[i];
            if i != j && work.abs() <= tol && amp[(j, i)].norm() > 0.0 {
                warnings.push(format!(
                    "transition {i} -> {j} has zero work and cannot be told apart from a trivial branch"
                ));
            }
            components.push(GaussianComponent {
                i,
                j,
                amplitude: amp[(j, i)],
                shift: scale * work,
                width: cfg.sigma,
            });
        }
    }
    if process
        .initial_spectrum()
        .multiplicities
        .iter()
        .any(|&m| m > 1)
    {
        warnings.push("initial Hamiltonian has degenerate levels".into());
    }
    if let Some(v) = cfg.kinetic_validity() {
        if v > 0.1 {
            warnings.push(format!(
                "kinetic phase is not negligible: p_max^2 T / 2m = {v:.3e}"
            ));
        }
    }
    Ok(GaussianDetectorState {
        cfg: *cfg,
        rho0,
        components,
        warnings,
    })
}

/// Phase readout between the momentum components `∓p₀/2`, rescaled by its
/// value before coupling. One detector preparation per λ.
pub fn protocol1_g(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
    lambdas: &[f64],
) -> Result<CharacteristicFunctionSamples> {
    cfg.validate()?;
    let half = 0.5 * cfg.p0;
    let reference = cfg.momentum_amplitude(-half)
        * cfg.momentum_amplitude(half).conj()
        * cfg.kinetic_phase(-half)
        * cfg.kinetic_phase(half).conj();
    let values = lambdas
        .par_iter()
        .map(|&l| {
            let joint = joint_evolution(state, process, &cfg.with_lambda(l))?;
            Ok(joint.momentum_element(-half, half) / reference)
        })
        .collect::<Result<Vec<C64>>>()?;
    Ok(CharacteristicFunctionSamples {
        lambdas: lambdas.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub center: f64,
    pub weight: f64,
}

/// Signed mixture `Σ_c weight_c N(x; center_c, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub sigma: f64,
    pub components: Vec<MixtureComponent>,
}

impl GaussianMixture {
    /// Atoms of `dist` at `scale · w`, each broadened by σ.
    pub fn from_distribution(dist: &WorkDistribution, scale: f64, sigma: f64) -> Self {
        GaussianMixture {
            sigma,
            components: dist
                .atoms()
                .iter()
                .map(|a| MixtureComponent {
                    center: scale * a.w,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn density(&self, x: f64) -> f64 {
        let s = self.sigma;
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * s);
        self.components
            .iter()
            .map(|c| c.weight * norm * (-(x - c.center).powi(2) / (2.0 * s * s)).exp())
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * self.sigma;
        self.components
            .iter()
            .map(|c| c.weight * 0.5 * (1.0 + erf((x - c.center) / scale)))
            .sum()
    }

    /// Mass on `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * self.sigma;
        self.components
            .iter()
            .map(|c| c.weight * 0.5 * (erf((hi - c.center) / scale) - erf((lo - c.center) / scale)))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.center).sum()
    }

    pub fn second_moment(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        self.components
            .iter()
            .map(|c| c.weight * (c.center * c.center + s2))
            .sum()
    }

    /// Smallest and largest component centre.
    pub fn center_range(&self) -> (f64, f64) {
        self.components
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c.center), hi.max(c.center))
            })
    }

    /// `½∫|p − q|` by the trapezoid rule on `points` nodes spanning both
    /// mixtures with 10σ margins.
    pub fn total_variation(&self, other: &GaussianMixture, points: usize) -> f64 {
        let (a_lo, a_hi) = self.center_range();
        let (b_lo, b_hi) = other.center_range();
        let margin = 10.0 * self.sigma.max(other.sigma);
        let lo = a_lo.min(b_lo) - margin;
        let hi = a_hi.max(b_hi) + margin;
        let n = points.max(2);
        let h = (hi - lo) / (n - 1) as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let x = lo + h * k as f64;
            let trap = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += trap * (self.density(x) - other.density(x)).abs();
        }
        0.5 * acc * h
    }
}

/// Pointer density sampled on a grid, with the analytic mixture it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionDensity {
    pub mixture: GaussianMixture,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl PositionDensity {
    /// Trapezoid integral over the grid.
    pub fn integrate(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Either representation of the pointer distribution.
#[derive(Debug, Clone)]
pub enum PositionDistribution {
    /// Infinitely sharp pointer: atoms at `λ(ε_j − ε_i)/p₀`.
    Delta(WorkDistribution),
    Mixture(GaussianMixture),
}

fn require_no_kinetic(cfg: &DetectorConfig) -> Result<()> {
    if cfg.include_kinetic_phase {
        return Err(Error::InvalidParameter(
            "position readout assumes a negligible kinetic phase; disable include_kinetic_phase"
                .into(),
        ));
    }
    Ok(())
}

/// Exact pointer density: using `g(x − a) g(x − b) = e^{−(a−b)²/8σ²}
/// N(x; (a+b)/2, σ²)`, each term `ρ_ik U_ji U*_jk g(Δx − s_ji) g(Δx − s_jk)`
/// becomes a Gaussian of width σ centred on `λ(ε_j − (ε_i+ε_k)/2)/p₀`.
pub fn protocol2_mixture(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
) -> Result<GaussianMixture> {
    cfg.validate()?;
    require_no_kinetic(cfg)?;
    let rho = state.energy_basis_matrix(process)?;
    let amp = process.transition_amplitudes();
    let e0 = process.initial_spectrum().basis_energies();
    let et = process.final_spectrum().basis_energies();
    let n = process.dim();
    let scale = cfg.shift_scale();
    let mut terms = Vec::with_capacity(n * n * n);
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                let a = scale * (et[j] - e0[i]);
                let b = scale * (et[j] - e0[k]);
                let w = rho[(i, k)] * amp[(j, i)] * amp[(j, k)].conj() * overlap(a, b, cfg.sigma);
                terms.push((0.5 * (a + b), w));
            }
        }
    }
    let tol = default_merge_tol(process) * scale.abs();
    let merged = crate::work::distribution::merge_atoms(terms, tol, |acc: &mut C64, x| *acc += x);
    let mut components = Vec::with_capacity(merged.len());
    for (center, w) in merged {
        if w.im.abs() > QUASI_IMAG_TOL {
            return Err(Error::NumericalCheck(format!(
                "pointer component at {center} has imaginary weight {:.3e}",
                w.im
            )));
        }
        if w.re != 0.0 {
            components.push(MixtureComponent {
                center,
                weight: w.re,
            });
        }
    }
    let mixture = GaussianMixture {
        sigma: cfg.sigma,
        components,
    };
    let total = mixture.total_weight();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NumericalCheck(format!(
            "pointer density has total mass {total}, expected 1"
        )));
    }
    Ok(mixture)
}

/// Pointer density on `grid`. The grid must reach `±(max|shift| + 6σ)`.
pub fn protocol2_position_pdf(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
    grid: &[f64],
) -> Result<PositionDensity> {
    let mixture = protocol2_mixture(state, process, cfg)?;
    let scale = cfg.shift_scale().abs();
    let e0 = &process.initial_spectrum().energies;
    let et = &process.final_spectrum().energies;
    let max_shift = et
        .iter()
        .flat_map(|ej| e0.iter().map(move |ei| (ej - ei).abs()))
        .fold(0.0_f64, f64::max)
        * scale;
    let need = max_shift + COVERAGE_SIGMAS * cfg.sigma;
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if grid.is_empty() || lo > -need || hi < need {
        return Err(Error::GridCoverage {
            lo,
            hi,
            need_lo: -need,
            need_hi: need,
        });
    }
    let values = grid.par_iter().map(|&x| mixture.density(x)).collect();
    Ok(PositionDensity {
        mixture,
        grid: grid.to_vec(),
        values,
    })
}

/// Sharp-pointer branch: atoms at `λ(ε_j^T − ε_i^0)/p₀` with weights
/// `Σ Re[ρ_ik U_ji U*_jk]` over pairs with `ε_i^0 = ε_k^0`.
pub fn protocol2_delta(
    state: &InitialState,
    process: &Process,
    cfg: &DetectorConfig,
) -> Result<WorkDistribution> {
    cfg.validate()?;
    require_no_kinetic(cfg)?;
    let rho = state.energy_basis_matrix(process)?;
    let amp = process.transition_amplitudes();
    let e0 = process.initial_spectrum().basis_energies();
    let et = process.final_spectrum().basis_energies();
    let levels = process.initial_spectrum().level_of();
    let n = process.dim();
    let scale = cfg.shift_scale();
    let mut contributions = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                if levels[i] == levels[k] {
                    let w = rho[(i, k)] * amp[(j, i)] * amp[(j, k)].conj();
                    contributions.push((scale * (et[j] - e0[i]), w));
                }
            }
        }
    }
    WorkDistribution::from_complex_contributions(
        contributions,
        DistributionKind::Probability,
        default_merge_tol(process) * scale.abs(),
        QUASI_IMAG_TOL,
    )
}

/// Moments of the pointer `X = κW + ξ`, `ξ ~ N(0, σ²)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LightAncillaReport {
    pub kappa: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mean_w: f64,
    pub second_w: f64,
    pub exp_w: f64,
    /// Pointer expectations from quadrature over the readout noise.
    pub mean_x: f64,
    pub second_x: f64,
    pub exp_x: f64,
    /// `exp(β²σ²/2κ²)`.
    pub correction_factor: f64,
    /// `⟨e^{−βX/κ}⟩ / correction_factor`.
    pub corrected_exp: f64,
    /// Largest relative mismatch between quadrature and the closed forms
    /// `⟨X⟩ = κ⟨W⟩`, `⟨X²⟩ = σ² + κ²⟨W²⟩`, `⟨e^{−βX/κ}⟩ = ⟨e^{−βW}⟩ e^{β²σ²/2κ²}`.
    pub identity_deviation: f64,
}

const HERMITE_NODES: usize = 64;

/// Nodes and weights for `E[f(Z)]`, `Z ~ N(0, 1)`, by Golub–Welsch.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |r, c| {
        if r + 1 == c {
            (c as f64).sqrt()
        } else if c + 1 == r {
            (r as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let weights: Vec<f64> = (0..n).map(|k| eig.eigenvectors[(0, k)].powi(2)).collect();
    let total: f64 = weights.iter().sum();
    (
        eig.eigenvalues.iter().copied().collect(),
        weights.iter().map(|w| w / total).collect(),
    )
}

pub fn light_ancilla_moments(
    dist: &WorkDistribution,
    kappa: f64,
    sigma: f64,
    beta: f64,
) -> Result<LightAncillaReport> {
    if dist.kind() != DistributionKind::Probability {
        return Err(Error::InvalidParameter(
            "light-ancilla readout needs a probability distribution".into(),
        ));
    }
    if kappa == 0.0 || !kappa.is_finite() || !(sigma >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "invalid readout parameters kappa = {kappa}, sigma = {sigma}, beta = {beta}"
        )));
    }
    let (nodes, weights) = gauss_hermite(HERMITE_NODES);
    let (mut mean_x, mut second_x, mut exp_x) = (0.0, 0.0, 0.0);
    for a in dist.atoms() {
        for (z, q) in nodes.iter().zip(&weights) {
            let x = kappa * a.w + sigma * z;
            let p = a.weight * q;
            mean_x += p * x;
            second_x += p * x * x;
            exp_x += p * (-beta * x / kappa).exp();
        }
    }
    let mean_w = dist.moment(1);
    let second_w = dist.moment(2);
    let exp_w = dist.exponential_average(beta);
    let correction_factor = (beta * beta * sigma * sigma / (2.0 * kappa * kappa)).exp();
    let rel = |got: f64, want: f64, scale: f64| (got - want).abs() / scale.max(1.0);
    let second_expected = sigma * sigma + kappa * kappa * second_w;
    let exp_expected = exp_w * correction_factor;
    let identity_deviation = rel(mean_x, kappa * mean_w, (kappa * mean_w).abs())
        .max(rel(second_x, second_expected, second_expected.abs()))
        .max((exp_x - exp_expected).abs() / exp_expected.abs());
    Ok(LightAncillaReport {
        kappa,
        sigma,
        beta,
        mean_w,
        second_w,
        exp_w,
        mean_x,
        second_x,
        exp_x,
        correction_factor,
        corrected_exp: exp_x / correction_factor,
        identity_deviation,
    })
}

/// Spin-dependent momentum kick `e^{iδp z_D σ_S}` with
/// `σ_S = |1⟩⟨1| + 2|2⟩⟨2|`: level `m` gains momentum `m·δp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumKick {
    pub delta_p: f64,
}

impl MomentumKick {
    /// `m_F` values of the two spin levels.
    pub const LEVELS: [f64; 2] = [1.0, 2.0];

    pub fn shift(&self, level: usize) -> f64 {
        Self::LEVELS[level] * self.delta_p
    }

    pub fn is_identity(&self) -> bool {
        self.delta_p == 0.0
    }

    /// Diagonal phase `e^{iδp z m}` the kick imprints on level `m` at
    /// detector position `z`.
    pub fn phase_at(&self, z: f64) -> Operator {
        Operator::from_fn(2, 2, |r, c| {
            if r == c {
                C64::from_polar(1.0, self.delta_p * z * Self::LEVELS[r])
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

pub fn momentum_kick_unitary(delta_p: f64) -> MomentumKick {
    MomentumKick { delta_p }
}

/// One momentum peak of a kick sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickComponent {
    pub i: usize,
    pub j: usize,
    pub momentum: f64,
    pub weight: f64,
}

/// First kick with `−δp`, drive `u_s`, second kick with `+δp`, on spin
/// populations `populations`. Kicks large enough to separate the peaks
/// suppress initial coherences, so each `(i, j)` peak at `(m_j − m_i)δp`
/// carries `P_i |U_ji|²`. Components are not merged.
pub fn kick_sequence(
    populations: &[f64; 2],
    u_s: &Operator,
    kick: MomentumKick,
) -> Result<Vec<KickComponent>> {
    crate::quantum::check_same_dim(2, &[u_s])?;
    crate::quantum::check_unitary(u_s)?;
    let total: f64 = populations.iter().sum();
    if populations.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-10 {
        return Err(Error::NotDensity(format!(
            "spin populations {populations:?} are not a probability vector"
        )));
    }
    let mut out = Vec::with_capacity(4);
    for (i, &p) in populations.iter().enumerate() {
        for j in 0..2 {
            out.push(KickComponent {
                i,
                j,
                momentum: kick.shift(j) - kick.shift(i),
                weight: p * u_s[(j, i)].norm_sqr(),
            });
        }
    }
    Ok(out)
}

/// Kick peaks as a distribution in momentum.
pub fn kick_distribution(components: &[KickComponent]) -> Result<WorkDistribution> {
    WorkDistribution::new(
        components
            .iter()
            .map(|c| Atom {
                w: c.momentum,
                weight: c.weight,
            })
            .collect(),
        DistributionKind::Probability,
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;
    use crate::work::{g_lambda, quasi_distribution, tmp_distribution};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> InitialState {
        InitialState::pure(Ket::from_vec(vec![
            c(FRAC_1_SQRT_2, 0.),
            c(FRAC_1_SQRT_2, 0.),
        ]))
        .unwrap()
    }

    fn hadamard_process() -> Process {
        Process::new(pauli_z(), pauli_z(), hadamard()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(1.0, 0.0, 1.0).is_err());
        assert!(DetectorConfig::new(1.0, 1.0, 0.0).is_err());
        let cfg = DetectorConfig::new(1.0, 1.0, 1.0).unwrap();
        assert!(cfg.with_kinetic_phase(-1.0, 1.0).is_err());
        let k = cfg.with_kinetic_phase(2.0, 0.5).unwrap();
        assert!((k.kinetic_validity().unwrap() - 9.0 * 0.5 / (8.0 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_leaves_detector_unentangled() {
        let p = hadamard_process();
        let state = plus();
        let cfg = DetectorConfig::new(0.0, 1.0, 0.3).unwrap();
        let joint = joint_evolution(&state, &p, &cfg).unwrap();
        assert!(joint.components.iter().all(|c| c.shift == 0.0));
        let a = p.transition_amplitudes();
        let expected = &a * state.energy_basis_matrix(&p).unwrap() * a.adjoint();
        assert!(max_abs(&(joint.system_state() - expected)) < 1e-12);
        assert!((joint.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flip_shifts_pointer_by_two() {
        let p = Process::new(pauli_z(), pauli_z(), pauli_x()).unwrap();
        let cfg = DetectorConfig::new(1.0, 1.0, 0.2).unwrap();
        let joint = joint_evolution(&InitialState::Ground, &p, &cfg).unwrap();
        let live: Vec<_> = joint
            .components
            .iter()
            .filter(|c| c.amplitude.norm() > 0.5 && joint.rho0[(c.i, c.i)].re > 0.5)
            .collect();
        assert_eq!(live.len(), 1);
        assert_eq!(live[0].shift, 2.0);
        let m = protocol2_mixture(&InitialState::Ground, &p, &cfg).unwrap();
        assert_eq!(m.components.len(), 1);
        assert!((m.mean() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn protocol1_matches_g_lambda_for_coherent_state() {
        let p = hadamard_process();
        let lambdas = [0.0, 0.2, 0.9, 2.5];
        let cfg = DetectorConfig::new(1.0, 3.0, 0.4).unwrap();
        let g = protocol1_g(&plus(), &p, &cfg, &lambdas).unwrap();
        let exact = g_lambda(&plus(), &p, &lambdas).unwrap();
        assert!(g.max_deviation(&exact) < 1e-12);
        let kin = cfg.with_kinetic_phase(0.7, 3.0).unwrap();
        let g_kin = protocol1_g(&plus(), &p, &kin, &lambdas).unwrap();
        assert!(g.max_deviation(&g_kin) < 1e-12);
    }

    #[test]
    fn mixture_matches_positive_form_and_is_normalised() {
        let p = hadamard_process();
        let cfg = DetectorConfig::new(1.0, 1.0, 0.8).unwrap();
        let joint = joint_evolution(&plus(), &p, &cfg).unwrap();
        let m = protocol2_mixture(&plus(), &p, &cfg).unwrap();
        assert!((m.total_weight() - 1.0).abs() < 1e-12);
        for k in 0..200 {
            let x = -8.0 + 0.08 * k as f64;
            let a = m.density(x);
            let b = joint.position_density_positive_form(x);
            assert!((a - b).abs() < 1e-12, "x = {x}: {a} vs {b}");
            assert!(b >= -1e-12);
        }
        assert!((m.cdf(1e3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_mixture_is_broadened_tmp() {
        let p = hadamard_process();
        let state = InitialState::thermal(1.0).unwrap();
        let cfg = DetectorConfig::new(0.5, 1.0, 0.3).unwrap();
        let m = protocol2_mixture(&state, &p, &cfg).unwrap();
        let oracle =
            GaussianMixture::from_distribution(&tmp_distribution(&state, &p).unwrap(), 0.5, 0.3);
        for k in 0..100 {
            let x = -3.0 + 0.06 * k as f64;
            assert!((m.density(x) - oracle.density(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_coverage_enforced() {
        let p = hadamard_process();
        let cfg = DetectorConfig::new(1.0, 1.0, 0.1).unwrap();
        let short: Vec<f64> = (0..11).map(|k| -1.0 + 0.2 * k as f64).collect();
        assert!(matches!(
            protocol2_position_pdf(&plus(), &p, &cfg, &short),
            Err(Error::GridCoverage { .. })
        ));
        let grid: Vec<f64> = (0..2001).map(|k| -3.0 + 0.003 * k as f64).collect();
        let d = protocol2_position_pdf(&plus(), &p, &cfg, &grid).unwrap();
        assert!((d.integrate() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn delta_branch_gives_tmp_atoms() {
        let p = hadamard_process();
        let cfg = DetectorConfig::new(2.0, 1.0, 1.0).unwrap();
        let d = protocol2_delta(&plus(), &p, &cfg).unwrap();
        let tmp = tmp_distribution(&plus(), &p).unwrap().scaled(2.0);
        assert_eq!(d.len(), tmp.len());
        for (a, b) in d.atoms().iter().zip(tmp.atoms()) {
            assert!((a.w - b.w).abs() < 1e-12 && (a.weight - b.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_mean_is_dephased_energy_change() {
        let p = hadamard_process();
        let (scale, sigma) = (0.5, 0.4);
        let cfg = DetectorConfig::new(scale, 1.0, sigma).unwrap();
        let m = protocol2_mixture(&plus(), &p, &cfg).unwrap();
        // ρ_01 is damped by exp(−(scale·2)²/8σ²) before the drive.
        let damp = (-(scale * 2.0f64).powi(2) / (8.0 * sigma * sigma)).exp();
        let q = quasi_distribution(&plus(), &p).unwrap();
        assert!((m.mean() - scale * damp * q.mean()).abs() < 1e-12);
    }

    #[test]
    fn light_ancilla_closed_forms() {
        let atom = WorkDistribution::new(
            vec![Atom {
                w: 2.0,
                weight: 1.0,
            }],
            DistributionKind::Probability,
            0.0,
        )
        .unwrap();
        let r = light_ancilla_moments(&atom, 1.0, 0.0, 1.0).unwrap();
        assert!((r.mean_x - 2.0).abs() < 1e-14 && (r.second_x - 4.0).abs() < 1e-13);
        let tmp =
            tmp_distribution(&InitialState::thermal(1.0).unwrap(), &hadamard_process()).unwrap();
        let r = light_ancilla_moments(&tmp, 2.0, 1.0, 1.0).unwrap();
        assert!((r.correction_factor - (0.125f64).exp()).abs() < 1e-15);
        assert!(r.identity_deviation < 1e-12, "{}", r.identity_deviation);
    }

    #[test]
    fn kicks() {
        let k = momentum_kick_unitary(0.0);
        assert!(k.is_identity());
        assert!(max_abs(&(k.phase_at(3.0) - identity(2))) < 1e-15);
        let comps = kick_sequence(&[1.0, 0.0], &identity(2), momentum_kick_unitary(0.7)).unwrap();
        let live: Vec<_> = comps.iter().filter(|c| c.weight > 0.0).collect();
        assert_eq!(live.len(), 1);
        assert_eq!(live[0].momentum, 0.0);
    }
}
