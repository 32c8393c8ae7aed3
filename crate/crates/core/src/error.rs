use thiserror::Error;

/// Errors raised by the work-statistics library.
///
/// Every variant names the invariant that was violated so that callers (the
/// CLI in particular) can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max|H - H^dagger| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("operator is not unitary: max|U^dagger U - I| = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "ill-conditioned inversion (condition number {cond:.3e}); \
         use a denser or wider lambda grid"
    )]
    IllConditioned { cond: f64 },

    #[error("unpaired atom at W = {w} with weight {weight:.3e}")]
    UnpairedAtom { w: f64, weight: f64 },

    #[error("grid [{lo}, {hi}] does not cover the required range [{need_lo}, {need_hi}]")]
    GridCoverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("numerical check failed: {0}")]
    NumericalCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
