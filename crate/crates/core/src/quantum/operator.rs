//! Dense complex operators on small Hilbert spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense square complex matrix: Hamiltonians, unitaries and density operators
/// all share this representation (ħ = 1).
pub type Operator = DMatrix<C64>;

/// State vector in the same representation as [`Operator`].
pub type Ket = DVector<C64>;

/// Tolerance for Hermiticity, unitarity and density-operator checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn zeros(dim: usize) -> Operator {
    Operator::zeros(dim, dim)
}

pub fn pauli_x() -> Operator {
    Operator::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> Operator {
    Operator::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> Operator {
    Operator::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Hadamard gate `(σ_z + σ_x)/√2`.
pub fn hadamard() -> Operator {
    (pauli_z() + pauli_x()).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Diagonal operator with the given real entries.
pub fn diag(values: &[f64]) -> Operator {
    Operator::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Projector `|ψ⟩⟨ψ|` onto a (normalised) ket.
pub fn projector(psi: &Ket) -> Operator {
    psi * psi.adjoint()
}

/// Largest absolute entry.
pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(h: &Operator) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn unitarity_defect(u: &Operator) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

fn check_square(m: &Operator) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidParameter("operator of dimension 0".into()));
    }
    Ok(m.nrows())
}

pub fn check_hermitian(h: &Operator) -> Result<()> {
    check_square(h)?;
    let defect = hermiticity_defect(h);
    if defect > STRUCTURE_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

pub fn check_unitary(u: &Operator) -> Result<()> {
    check_square(u)?;
    let defect = unitarity_defect(u);
    if defect > STRUCTURE_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// Hermitian, positive semidefinite and unit trace, each within
/// [`STRUCTURE_TOL`].
pub fn check_density(rho: &Operator) -> Result<()> {
    check_square(rho)?;
    let defect = hermiticity_defect(rho);
    if defect > STRUCTURE_TOL {
        return Err(Error::NotDensity(format!(
            "not Hermitian (max|rho - rho^dagger| = {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > STRUCTURE_TOL {
        return Err(Error::NotDensity(format!(
            "trace {} + {}i differs from 1",
            tr.re, tr.im
        )));
    }
    let herm = (rho + rho.adjoint()).scale(0.5);
    let min_eig = herm
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -STRUCTURE_TOL {
        return Err(Error::NotDensity(format!(
            "negative eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(())
}

pub fn check_same_dim(expected: usize, ops: &[&Operator]) -> Result<()> {
    for op in ops {
        check_square(op)?;
        if op.nrows() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: op.nrows(),
            });
        }
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`; `a` is the left (slower-varying) factor.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Traces out subsystem `which` of a joint operator on `dims[0] ⊗ dims[1] ⊗ …`.
///
/// The remaining subsystems keep their relative order.
pub fn partial_trace(joint: &Operator, which: usize, dims: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    check_square(joint)?;
    if joint.nrows() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: joint.nrows(),
        });
    }
    if which >= dims.len() {
        return Err(Error::InvalidParameter(format!(
            "subsystem index {which} out of range for {} subsystems",
            dims.len()
        )));
    }
    // Index layout: (outer, traced, inner) with strides inner_dim and 1.
    let outer: usize = dims[..which].iter().product();
    let traced = dims[which];
    let inner: usize = dims[which + 1..].iter().product();
    let reduced = outer * inner;
    let mut out = Operator::zeros(reduced, reduced);
    for a_out in 0..outer {
        for a_in in 0..inner {
            let row = a_out * inner + a_in;
            for b_out in 0..outer {
                for b_in in 0..inner {
                    let col = b_out * inner + b_in;
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..traced {
                        let r = (a_out * traced + t) * inner + a_in;
                        let s = (b_out * traced + t) * inner + b_in;
                        acc += joint[(r, s)];
                    }
                    out[(row, col)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// `Tr[obs · rho]`.
pub fn expectation(obs: &Operator, rho: &Operator) -> Result<C64> {
    check_square(obs)?;
    check_same_dim(obs.nrows(), &[rho])?;
    // Tr[AB] = Σ_ij A_ij B_ji without forming the product.
    let n = obs.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += obs[(i, j)] * rho[(j, i)];
        }
    }
    Ok(acc)
}
