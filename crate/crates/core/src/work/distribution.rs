use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atoms whose weights sum to something further than this from one are
/// rejected.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Slack below zero tolerated on probability weights.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// Relative scale of [`merge_tol_for`].
pub const DEFAULT_MERGE_REL: f64 = 1e-9;

/// Weights below this magnitude are structural zeros and are dropped.
pub const PRUNE_TOL: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Probability,
    QuasiProbability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub w: f64,
    pub weight: f64,
}

/// Absolute merge tolerance `rel · max|ε|` for a set of energies.
pub fn merge_tol_for<'a, I: IntoIterator<Item = &'a f64>>(energies: I) -> f64 {
    let scale = energies.into_iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    DEFAULT_MERGE_REL * scale
}

/// Finite set of work values with real weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkDistribution {
    atoms: Vec<Atom>,
    kind: DistributionKind,
}

impl WorkDistribution {
    /// Sorts, merges atoms closer than `merge_tol` and validates the result.
    pub fn new(atoms: Vec<Atom>, kind: DistributionKind, merge_tol: f64) -> Result<Self> {
        let merged = merge_atoms(
            atoms.into_iter().map(|a| (a.w, a.weight)).collect(),
            merge_tol,
            |acc: &mut f64, x| *acc += x,
        );
        let atoms = merged
            .into_iter()
            .filter(|(_, wt)| wt.abs() > PRUNE_TOL)
            .map(|(w, weight)| Atom { w, weight })
            .collect();
        let dist = WorkDistribution { atoms, kind };
        dist.validate()?;
        Ok(dist)
    }

    /// Merges complex contributions and keeps the real part, failing when a
    /// merged atom keeps an imaginary part above `imag_tol`.
    pub fn from_complex_contributions(
        contributions: Vec<(f64, C64)>,
        kind: DistributionKind,
        merge_tol: f64,
        imag_tol: f64,
    ) -> Result<Self> {
        let merged = merge_atoms(contributions, merge_tol, |acc: &mut C64, x| *acc += x);
        let mut atoms = Vec::with_capacity(merged.len());
        for (w, z) in merged {
            if z.im.abs() > imag_tol {
                return Err(Error::NumericalCheck(format!(
                    "atom at W = {w} has imaginary weight {:.3e}",
                    z.im
                )));
            }
            if z.re.abs() > PRUNE_TOL {
                atoms.push(Atom { w, weight: z.re });
            }
        }
        let dist = WorkDistribution { atoms, kind };
        dist.validate()?;
        Ok(dist)
    }

    fn validate(&self) -> Result<()> {
        if self
            .atoms
            .iter()
            .any(|a| !a.w.is_finite() || !a.weight.is_finite())
        {
            return Err(Error::NumericalCheck("non-finite work atom".into()));
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NumericalCheck(format!(
                "work weights sum to {total}, expected 1"
            )));
        }
        if self.kind == DistributionKind::Probability {
            if let Some(a) = self.atoms.iter().find(|a| a.weight < -NEGATIVITY_TOL) {
                return Err(Error::NumericalCheck(format!(
                    "probability atom at W = {} has negative weight {:.3e}",
                    a.w, a.weight
                )));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight)
            .fold(f64::INFINITY, f64::min)
    }

    /// Weight of the atom within `tol` of `w`, zero if none.
    pub fn weight_at(&self, w: f64, tol: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.w - w).abs() <= tol)
            .map(|a| a.weight)
            .sum()
    }

    /// `Σ_k weight_k · w_k^order`.
    pub fn moment(&self, order: u32) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * a.w.powi(order as i32))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `Σ_k weight_k e^{−β w_k}`.
    pub fn exponential_average(&self, beta: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * (-beta * a.w).exp())
            .sum()
    }

    /// `Σ_k weight_k e^{iλ w_k}`.
    pub fn fourier(&self, lambda: f64) -> C64 {
        self.atoms
            .iter()
            .map(|a| C64::from_polar(a.weight, lambda * a.w))
            .sum()
    }

    /// Same atoms with `w → −w`.
    pub fn mirrored(&self) -> Self {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                w: -a.w,
                weight: a.weight,
            })
            .collect();
        atoms.reverse();
        WorkDistribution {
            atoms,
            kind: self.kind,
        }
    }

    /// Support scaled by `factor` (e.g. `λ/p₀` for a pointer readout).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                w: a.w * factor,
                weight: a.weight,
            })
            .collect();
        atoms.sort_by(|a, b| a.w.total_cmp(&b.w));
        WorkDistribution {
            atoms,
            kind: self.kind,
        }
    }
}

/// Sorts by value and greedily groups values within `tol` of the first
/// member of each group; the group sits at the mean of its members.
pub(crate) fn merge_atoms<T: Copy + Default>(
    mut items: Vec<(f64, T)>,
    tol: f64,
    add: impl Fn(&mut T, T),
) -> Vec<(f64, T)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, T)> = Vec::new();
    let mut group_start = f64::NAN;
    let mut group_sum = 0.0;
    let mut group_len = 0usize;
    for (w, x) in items {
        if group_len > 0 && w - group_start <= tol {
            let last = out.last_mut().expect("open group");
            add(&mut last.1, x);
            group_sum += w;
            group_len += 1;
            last.0 = group_sum / group_len as f64;
        } else {
            let mut acc = T::default();
            add(&mut acc, x);
            out.push((w, acc));
            group_start = w;
            group_sum = w;
            group_len = 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(w: f64, weight: f64) -> Atom {
        Atom { w, weight }
    }

    #[test]
    fn merges_and_sorts() {
        let d = WorkDistribution::new(
            vec![atom(2.0, 0.25), atom(-1.0, 0.5), atom(2.0 + 1e-12, 0.25)],
            DistributionKind::Probability,
            1e-9,
        )
        .unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.atoms()[0].w, -1.0);
        assert!((d.atoms()[1].weight - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalised() {
        let err = WorkDistribution::new(vec![atom(0.0, 0.9)], DistributionKind::Probability, 0.0);
        assert!(matches!(err, Err(Error::NumericalCheck(_))));
    }

    #[test]
    fn rejects_negative_probability_but_not_quasi() {
        let atoms = vec![atom(0.0, 1.5), atom(1.0, -0.5)];
        assert!(WorkDistribution::new(atoms.clone(), DistributionKind::Probability, 0.0).is_err());
        let q = WorkDistribution::new(atoms, DistributionKind::QuasiProbability, 0.0).unwrap();
        assert_eq!(q.min_weight(), -0.5);
    }

    #[test]
    fn drops_structural_zeros() {
        let d = WorkDistribution::new(
            vec![atom(0.0, 1.0), atom(2.0, 0.0)],
            DistributionKind::Probability,
            0.0,
        )
        .unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn imaginary_residue_is_surfaced() {
        let contributions = vec![(0.0, C64::new(1.0, 1e-3)), (1.0, C64::new(0.0, 0.0))];
        let err = WorkDistribution::from_complex_contributions(
            contributions,
            DistributionKind::QuasiProbability,
            0.0,
            1e-10,
        );
        assert!(matches!(err, Err(Error::NumericalCheck(_))));
    }

    #[test]
    fn fourier_of_single_atom() {
        let d = WorkDistribution::new(vec![atom(2.0, 1.0)], DistributionKind::Probability, 0.0)
            .unwrap();
        let z = d.fourier(0.3);
        assert!((z - C64::from_polar(1.0, 0.6)).norm() < 1e-15);
    }

    #[test]
    fn mirrored_is_sorted() {
        let d = WorkDistribution::new(
            vec![atom(-1.0, 0.3), atom(2.0, 0.7)],
            DistributionKind::Probability,
            0.0,
        )
        .unwrap();
        let m = d.mirrored();
        assert_eq!(m.atoms()[0].w, -2.0);
        assert_eq!(m.atoms()[1].w, 1.0);
    }
}
