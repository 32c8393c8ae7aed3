//! Eigendecomposition of Hermitian operators with degeneracy clustering.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::operator::{check_hermitian, Operator};
use crate::error::Result;

/// Default relative tolerance under which eigenvalues are merged.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-9;

/// Spectral decomposition `H = Σ_i ε_i Π_i` with distinct, increasing `ε_i`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    pub projectors: Vec<Operator>,
    pub multiplicities: Vec<usize>,
    /// Orthonormal eigenvectors as columns, ordered by level.
    basis: Operator,
    /// Level index of each column of `basis`.
    level_of: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvectors as the columns of a unitary matrix, grouped by level.
    pub fn basis(&self) -> &Operator {
        &self.basis
    }

    /// Clustered energy attached to every column of [`Self::basis`].
    pub fn basis_energies(&self) -> Vec<f64> {
        self.level_of.iter().map(|&l| self.energies[l]).collect()
    }

    pub fn level_of(&self) -> &[usize] {
        &self.level_of
    }

    /// `Σ_i f(ε_i) Π_i`.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> Operator {
        let n = self.dim();
        let mut out = Operator::zeros(n, n);
        for (e, p) in self.energies.iter().zip(&self.projectors) {
            out += p * f(*e);
        }
        out
    }

    /// `Σ_i ε_i Π_i`.
    pub fn reconstruct(&self) -> Operator {
        self.apply(|e| C64::new(e, 0.0))
    }

    /// `exp(−i H t)`.
    pub fn propagator(&self, t: f64) -> Operator {
        self.apply(|e| C64::from_polar(1.0, -e * t))
    }
}

/// Decomposes a Hermitian operator, merging eigenvalues closer than
/// `cluster_tol · max(1, ‖H‖)`.
pub fn spectral_decompose(h: &Operator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let n = h.nrows();
    let herm = (h + h.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gap_tol = cluster_tol * norm.max(1.0);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(cl) if v - values[*cl.last().unwrap()] <= gap_tol => cl.push(pos),
            _ => clusters.push(vec![pos]),
        }
    }

    let mut basis = Operator::zeros(n, n);
    let mut level_of = Vec::with_capacity(n);
    let mut energies = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    let mut col = 0;
    for (level, cl) in clusters.iter().enumerate() {
        let mut proj = Operator::zeros(n, n);
        let mut sum = 0.0;
        for &pos in cl {
            let v: DVector<C64> = eig.eigenvectors.column(order[pos]).into_owned();
            proj += &v * v.adjoint();
            basis.set_column(col, &v);
            level_of.push(level);
            sum += values[pos];
            col += 1;
        }
        energies.push(sum / cl.len() as f64);
        projectors.push(proj);
        multiplicities.push(cl.len());
    }

    Ok(SpectralDecomposition {
        energies,
        projectors,
        multiplicities,
        basis,
        level_of,
    })
}

/// `exp(−i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Ok(spectral_decompose(h, 0.0)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::quantum::operator::*;
    use std::f64::consts::PI;

    fn assert_complete_orthogonal(sd: &SpectralDecomposition) {
        let n = sd.dim();
        let mut sum = zeros(n);
        for (a, pa) in sd.projectors.iter().enumerate() {
            sum += pa;
            for (b, pb) in sd.projectors.iter().enumerate() {
                let prod = pa * pb;
                let expect = if a == b { pa.clone() } else { zeros(n) };
                assert!(max_abs(&(prod - expect)) < 1e-10);
            }
        }
        assert!(max_abs(&(sum - identity(n))) < 1e-10);
    }

    #[test]
    fn pauli_z_levels() {
        let sd = spectral_decompose(&pauli_z(), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(sd.energies, vec![-1.0, 1.0]);
        assert_eq!(sd.multiplicities, vec![1, 1]);
        assert!(max_abs(&(&sd.projectors[0] - diag(&[0.0, 1.0]))) < 1e-14);
        assert_complete_orthogonal(&sd);
    }

    #[test]
    fn identity_is_one_level() {
        let sd = spectral_decompose(&identity(2), 1e-9).unwrap();
        assert_eq!(sd.energies.len(), 1);
        assert!((sd.energies[0] - 1.0).abs() < 1e-15);
        assert_eq!(sd.multiplicities, vec![2]);
        assert!(max_abs(&(&sd.projectors[0] - identity(2))) < 1e-14);
    }

    #[test]
    fn rotated_field_spectrum() {
        let nu = 1.3;
        for k in 0..8 {
            let theta = k as f64 * 0.4;
            let h =
                (pauli_x().scale(theta.sin()) + pauli_y().scale(theta.cos())).scale(2.0 * PI * nu);
            let sd = spectral_decompose(&h, DEFAULT_CLUSTER_TOL).unwrap();
            assert!((sd.energies[0] + 2.0 * PI * nu).abs() < 1e-12);
            assert!((sd.energies[1] - 2.0 * PI * nu).abs() < 1e-12);
            assert!(max_abs(&(sd.reconstruct() - h)) < 1e-9);
            assert_complete_orthogonal(&sd);
        }
    }

    #[test]
    fn near_degenerate_levels_are_merged() {
        let h = diag(&[0.0, 1e-12, 2.0]);
        let sd = spectral_decompose(&h, 1e-9).unwrap();
        assert_eq!(sd.multiplicities, vec![2, 1]);
        assert_complete_orthogonal(&sd);
        let strict = spectral_decompose(&h, 0.0).unwrap();
        assert_eq!(strict.multiplicities, vec![1, 1, 1]);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = Operator::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        match spectral_decompose(&m, 1e-9) {
            Err(Error::NotHermitian { defect }) => assert!((defect - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn propagator_of_pauli_z() {
        let u = expm_hermitian(&pauli_z(), PI / 2.0).unwrap();
        let expect = Operator::from_row_slice(2, 2, &[c(0., -1.), c(0., 0.), c(0., 0.), c(0., 1.)]);
        assert!(max_abs(&(u - expect)) < 1e-15);
    }
}
