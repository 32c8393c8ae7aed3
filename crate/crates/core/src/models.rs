//! Ready-made driven systems: the rotating-field qubit ramp, a collective
//! spin in a rotating field, and sudden quenches.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::Process;
use crate::quantum::{pauli_x, pauli_y, HamiltonianSchedule, Operator, Segment};

pub const DEFAULT_STEPS_PER_SEGMENT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Qubit in a rotating field whose amplitude is ramped linearly:
/// `H(t) = 2πν(t)(σ_x sin(πt/2τ) + σ_y cos(πt/2τ))`, `ν(t) = ν1 + (ν2 − ν1)t/τ`.
///
/// The backward direction is the time-reversed drive `H_B(t) = H_F(τ − t)`:
/// the ramp runs from ν2 down to ν1 and the field rotates back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmrModel {
    pub nu1: f64,
    pub nu2: f64,
    pub tau: f64,
    pub direction: Direction,
}

impl Default for NmrModel {
    fn default() -> Self {
        NmrModel {
            nu1: 1.0,
            nu2: 1.8,
            tau: 1.0,
            direction: Direction::Forward,
        }
    }
}

impl NmrModel {
    pub fn new(nu1: f64, nu2: f64, tau: f64, direction: Direction) -> Result<Self> {
        let m = NmrModel {
            nu1,
            nu2,
            tau,
            direction,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("nu1", self.nu1), ("nu2", self.nu2), ("tau", self.tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn reversed(&self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        };
        NmrModel { direction, ..*self }
    }

    fn forward_time(&self, t: f64) -> f64 {
        match self.direction {
            Direction::Forward => t,
            Direction::Backward => self.tau - t,
        }
    }

    /// Field amplitude ν at local time `t` of this leg.
    pub fn nu_at(&self, t: f64) -> f64 {
        let s = self.forward_time(t);
        self.nu1 + (self.nu2 - self.nu1) * s / self.tau
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        let s = self.forward_time(t);
        let nu = self.nu1 + (self.nu2 - self.nu1) * s / self.tau;
        let angle = PI * s / (2.0 * self.tau);
        (pauli_x().scale(angle.sin()) + pauli_y().scale(angle.cos())).scale(2.0 * PI * nu)
    }

    pub fn schedule(&self) -> Result<HamiltonianSchedule> {
        nmr_schedule(self)
    }

    pub fn process(&self, steps_per_segment: usize) -> Result<Process> {
        Process::from_schedule(&self.schedule()?, steps_per_segment)
    }
}

pub fn nmr_schedule(m: &NmrModel) -> Result<HamiltonianSchedule> {
    m.validate()?;
    let model = *m;
    Ok(HamiltonianSchedule::single(Segment::new(m.tau, move |t| {
        model.hamiltonian_at(t)
    })))
}

/// Spin-j angular momentum matrices `(J_x, J_y, J_z)` in the `|j, m⟩` basis
/// ordered `m = j, j−1, …, −j`.
pub fn spin_matrices(j: f64) -> Result<(Operator, Operator, Operator)> {
    let two_j = 2.0 * j;
    if !(j >= 0.0 && (two_j - two_j.round()).abs() < 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "spin quantum number must be a non-negative half-integer, got {j}"
        )));
    }
    let dim = two_j.round() as usize + 1;
    let m_of = |k: usize| j - k as f64;
    let mut jz = Operator::zeros(dim, dim);
    let mut jplus = Operator::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = C64::new(m_of(k), 0.0);
        if k > 0 {
            // ⟨m+1| J+ |m⟩ with |m⟩ at index k and |m+1⟩ at index k−1.
            let m = m_of(k);
            jplus[(k - 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus) * C64::new(0.0, -0.5);
    Ok((jx, jy, jz))
}

/// Collective spin in a rotating field of constant amplitude,
/// `H(t) = −γB[cos α(t) J_z + sin α(t) J_y]`, with α ramped linearly from
/// `alpha0` to `alpha_t` over `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveSpinModel {
    pub gamma_b: f64,
    pub alpha0: f64,
    pub alpha_t: f64,
    pub j: f64,
    pub duration: f64,
}

impl CollectiveSpinModel {
    pub fn dim(&self) -> usize {
        (2.0 * self.j).round() as usize + 1
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.alpha0 + (self.alpha_t - self.alpha0) * t / self.duration
    }

    pub fn hamiltonian_for_angle(&self, alpha: f64) -> Result<Operator> {
        let (_, jy, jz) = spin_matrices(self.j)?;
        Ok((jz.scale(alpha.cos()) + jy.scale(alpha.sin())).scale(-self.gamma_b))
    }

    pub fn process(&self, steps_per_segment: usize) -> Result<Process> {
        Process::from_schedule(&collective_spin_schedule(self)?, steps_per_segment)
    }

    /// Instantaneous rotation from `alpha0` to `alpha_t`.
    pub fn sudden_process(&self) -> Result<Process> {
        sudden_quench(
            self.hamiltonian_for_angle(self.alpha0)?,
            self.hamiltonian_for_angle(self.alpha_t)?,
        )
    }
}

pub fn collective_spin_schedule(m: &CollectiveSpinModel) -> Result<HamiltonianSchedule> {
    let (_, jy, jz) = spin_matrices(m.j)?;
    if !(m.duration > 0.0 && m.duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {}",
            m.duration
        )));
    }
    let model = *m;
    Ok(HamiltonianSchedule::single(Segment::new(
        m.duration,
        move |t| {
            let a = model.angle_at(t);
            (jz.scale(a.cos()) + jy.scale(a.sin())).scale(-model.gamma_b)
        },
    )))
}

/// `(H_0, H_T, U = I)`.
pub fn sudden_quench(h0: Operator, ht: Operator) -> Result<Process> {
    Process::sudden(h0, ht)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::*;

    #[test]
    fn nmr_endpoints() {
        let m = NmrModel::new(1.0, 2.0, 1.0, Direction::Forward).unwrap();
        let s = m.schedule().unwrap();
        let h0 = s.initial_hamiltonian().unwrap();
        let ht = s.final_hamiltonian().unwrap();
        assert!(max_abs(&(h0 - pauli_y().scale(2.0 * PI))) < 1e-12);
        assert!(max_abs(&(ht - pauli_x().scale(4.0 * PI))) < 1e-12);
    }

    #[test]
    fn nmr_backward_is_time_reverse() {
        let f = NmrModel::new(1.0, 1.8, 0.7, Direction::Forward).unwrap();
        let b = f.reversed();
        for k in 0..=10 {
            let t = 0.07 * k as f64;
            let diff = b.hamiltonian_at(t) - f.hamiltonian_at(0.7 - t);
            assert!(max_abs(&diff) < 1e-12);
        }
        assert!((b.nu_at(0.0) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn nmr_instantaneous_spectrum() {
        let m = NmrModel::new(1.0, 1.8, 1.0, Direction::Forward).unwrap();
        for k in 0..10 {
            let t = k as f64 / 9.0;
            let sd = spectral_decompose(&m.hamiltonian_at(t), DEFAULT_CLUSTER_TOL).unwrap();
            let e = 2.0 * PI * m.nu_at(t);
            assert!((sd.energies[0] + e).abs() < 1e-10);
            assert!((sd.energies[1] - e).abs() < 1e-10);
        }
    }

    #[test]
    fn nmr_rejects_bad_parameters() {
        assert!(NmrModel::new(0.0, 1.0, 1.0, Direction::Forward).is_err());
        assert!(NmrModel::new(1.0, 1.0, -1.0, Direction::Forward).is_err());
    }

    #[test]
    fn spin_half_matrices_are_half_paulis() {
        let (jx, jy, jz) = spin_matrices(0.5).unwrap();
        assert!(max_abs(&(jx - pauli_x().scale(0.5))) < 1e-15);
        assert!(max_abs(&(jy - pauli_y().scale(0.5))) < 1e-15);
        assert!(max_abs(&(jz - pauli_z().scale(0.5))) < 1e-15);
    }

    #[test]
    fn spin_commutation_relations() {
        for j in [0.5, 1.0, 1.5, 3.0] {
            let (jx, jy, jz) = spin_matrices(j).unwrap();
            let comm = &jx * &jy - &jy * &jx;
            assert!(max_abs(&(comm - jz.clone() * I)) < 1e-12);
            let casimir = &jx * &jx + &jy * &jy + &jz * &jz;
            let n = jz.nrows();
            assert!(max_abs(&(casimir - identity(n).scale(j * (j + 1.0)))) < 1e-12);
        }
        assert!(spin_matrices(0.3).is_err());
    }

    #[test]
    fn collective_spin_half_at_zero_angle() {
        let m = CollectiveSpinModel {
            gamma_b: 3.0,
            alpha0: 0.0,
            alpha_t: PI / 2.0,
            j: 0.5,
            duration: 1.0,
        };
        let h = m.hamiltonian_for_angle(0.0).unwrap();
        assert!(max_abs(&(h - pauli_z().scale(-1.5))) < 1e-15);
    }

    #[test]
    fn collective_spin_spectrum_is_angle_independent() {
        for j in [0.5, 1.0, 2.5] {
            let m = CollectiveSpinModel {
                gamma_b: 1.7,
                alpha0: 0.0,
                alpha_t: PI / 2.0,
                j,
                duration: 1.0,
            };
            let expect: Vec<f64> = (0..m.dim()).map(|k| -1.7 * (j - k as f64)).collect();
            for alpha in [0.0, PI / 3.0, PI / 2.0, 2.0] {
                let sd =
                    spectral_decompose(&m.hamiltonian_for_angle(alpha).unwrap(), 1e-9).unwrap();
                assert_eq!(sd.energies.len(), m.dim());
                for (a, b) in sd.energies.iter().zip(&expect) {
                    assert!((a - b).abs() < 1e-9, "j={j} alpha={alpha}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn spin_one_spectrum() {
        let m = CollectiveSpinModel {
            gamma_b: 2.0,
            alpha0: 0.0,
            alpha_t: 1.0,
            j: 1.0,
            duration: 1.0,
        };
        assert_eq!(m.dim(), 3);
        let sd = spectral_decompose(&m.hamiltonian_for_angle(0.4).unwrap(), 1e-9).unwrap();
        for (a, b) in sd.energies.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
