//! Time-ordered evolution under piecewise-defined Hamiltonians.

use std::fmt;
use std::sync::Arc;

use super::operator::{check_hermitian, check_same_dim, identity, Operator};
use super::spectral::expm_hermitian;
use crate::error::{Error, Result};

/// Map from local segment time `t ∈ [0, duration]` to a Hamiltonian.
pub type HamiltonianFn = Arc<dyn Fn(f64) -> Operator + Send + Sync>;

#[derive(Clone)]
pub struct Segment {
    pub duration: f64,
    pub hamiltonian: HamiltonianFn,
}

impl Segment {
    pub fn new<F>(duration: f64, hamiltonian: F) -> Self
    where
        F: Fn(f64) -> Operator + Send + Sync + 'static,
    {
        Segment {
            duration,
            hamiltonian: Arc::new(hamiltonian),
        }
    }

    pub fn constant(duration: f64, h: Operator) -> Self {
        Segment::new(duration, move |_| h.clone())
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Segment")
            .field("duration", &self.duration)
            .finish_non_exhaustive()
    }
}

/// Ordered list of segments; each segment sees its own local clock.
#[derive(Debug, Clone, Default)]
pub struct HamiltonianSchedule {
    pub segments: Vec<Segment>,
}

impl HamiltonianSchedule {
    pub fn new(segments: Vec<Segment>) -> Self {
        HamiltonianSchedule { segments }
    }

    pub fn single(segment: Segment) -> Self {
        HamiltonianSchedule {
            segments: vec![segment],
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Concatenation: `self` runs first, then `next`.
    pub fn then(mut self, next: HamiltonianSchedule) -> Self {
        self.segments.extend(next.segments);
        self
    }

    /// Hamiltonian at global time `t` (clamped to the schedule).
    pub fn hamiltonian_at(&self, t: f64) -> Option<Operator> {
        let mut start = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            let last = k + 1 == self.segments.len();
            if t <= start + seg.duration || last {
                let local = (t - start).clamp(0.0, seg.duration);
                return Some((seg.hamiltonian)(local));
            }
            start += seg.duration;
        }
        None
    }

    pub fn initial_hamiltonian(&self) -> Option<Operator> {
        self.segments.first().map(|s| (s.hamiltonian)(0.0))
    }

    pub fn final_hamiltonian(&self) -> Option<Operator> {
        self.segments.last().map(|s| (s.hamiltonian)(s.duration))
    }

    pub fn dim(&self) -> Option<usize> {
        self.initial_hamiltonian().map(|h| h.nrows())
    }

    /// Checks positive durations, consistent dimensions and Hermiticity at
    /// the segment endpoints and midpoint.
    pub fn validate(&self) -> Result<usize> {
        let dim = self
            .dim()
            .ok_or_else(|| Error::InvalidParameter("schedule has no segments".into()))?;
        for seg in &self.segments {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "segment duration must be positive, got {}",
                    seg.duration
                )));
            }
            for t in [0.0, 0.5 * seg.duration, seg.duration] {
                let h = (seg.hamiltonian)(t);
                check_same_dim(dim, &[&h])?;
                check_hermitian(&h)?;
            }
        }
        Ok(dim)
    }
}

/// Time-ordered propagator `U(T) = Π exp(−i H(t_mid) Δt)` (later factors on
/// the left), midpoint rule with `steps_per_segment` sub-steps per segment.
///
/// Global error is second order in `Δt`.
pub fn evolve(schedule: &HamiltonianSchedule, steps_per_segment: usize) -> Result<Operator> {
    if steps_per_segment == 0 {
        return Err(Error::InvalidParameter(
            "steps_per_segment must be at least 1".into(),
        ));
    }
    let dim = schedule.validate()?;
    let mut u = identity(dim);
    for seg in &schedule.segments {
        let dt = seg.duration / steps_per_segment as f64;
        for k in 0..steps_per_segment {
            let t_mid = (k as f64 + 0.5) * dt;
            let h = (seg.hamiltonian)(t_mid);
            u = expm_hermitian(&h, dt)? * u;
        }
    }
    Ok(u)
}
