//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree > 4")]
    DegreeOverflow,

    #[error("invalid degree {degree} for {op}")]
    InvalidDegree { op: &'static str, degree: usize },

    #[error("grid size must be even and at least 4, got {0}")]
    InvalidGridSize(usize),

    #[error("operands live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("not in range of Laplacian (mean = {mean:.3e})")]
    NotInLaplaceRange { mean: f64 },

    #[error("form is not exact: {reason} (d residual {d_residual:.3e}, harmonic residual {harmonic_residual:.3e})")]
    NotExact {
        reason: &'static str,
        d_residual: f64,
        harmonic_residual: f64,
    },

    #[error("degenerate or wrongly oriented (min u = {min_u:.3e})")]
    Degenerate { min_u: f64 },

    #[error("2-form is not closed (|d rho| = {residual:.3e})")]
    NotClosed { residual: f64 },

    #[error("metric construction is inconsistent: resulting tensor not symmetric positive definite")]
    MetricConsistency,

    #[error("tangent vector does not belong to this state")]
    StateMismatch,

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("invalid solver option: {0}")]
    InvalidOption(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
