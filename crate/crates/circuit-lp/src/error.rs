//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical routines report *why* they gave up (rank deficiency, residuals,
/// iteration limits) so that drivers can decide whether to retry at a tighter
/// tolerance or surface the failure.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The matrix does not have full row rank above the pivot tolerance.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A linear system that was expected to be consistent is not.
    #[error("inconsistent linear system: residual {residual:.3e} exceeds {tol:.3e}")]
    InconsistentSystem { residual: f64, tol: f64 },

    /// No extension of the prescribed coordinates into the subspace exists.
    #[error("no extension into the subspace: residual {residual:.3e} exceeds {tol:.3e}")]
    InconsistentProjection { residual: f64, tol: f64 },

    /// The iterative solver hit its iteration cap before reaching its target.
    #[error("iteration limit {0} reached before convergence")]
    IterationLimit(usize),

    /// A factorization or Newton system broke down beyond repair.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// Post-repair residuals exceed what the solver contract promised.
    #[error("residual too large after repair: {0}")]
    ResidualTooLarge(String),

    /// A state the underlying theory excludes was reached; this is the
    /// float-noise escape hatch and is retried once at a tighter tolerance
    /// before being surfaced.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    /// The estimate-update loop exceeded its restart cap.
    #[error("restart limit {0} exceeded")]
    RestartLimit(usize),

    /// A solver response failed re-measurement against the accuracy
    /// contract it was asked to honour.
    #[error("solver contract violation: {0}")]
    ContractViolation(String),

    /// Instance text could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Caller passed vectors/matrices of incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A NaN or infinity reached a public operation.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A size guard (e.g. on exact enumeration) was exceeded.
    #[error("guard exceeded: {0}")]
    Guard(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
