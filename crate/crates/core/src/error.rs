//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    /// Vectors or operators from different truncations were combined.
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Krylov space of a zero datum is empty.
    #[error("empty Krylov basis: the datum is zero")]
    EmptyBasis,

    /// Requested an operation the operator kind cannot express
    /// (e.g. the adjoint of a domain-extension operator).
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The operator fails a numerical class check (symmetric, skew,
    /// positive semidefinite) required by the requested solver.
    #[error("operator is not numerically {expected}: {detail}")]
    WrongOperatorClass {
        expected: &'static str,
        detail: String,
    },

    /// Negative curvature was detected inside a conjugate-gradient run.
    #[error(
        "negative curvature <p,Ap> = {curvature:.3e}: operator is indefinite; \
         use the squared-operator drivers"
    )]
    IndefiniteOperator { curvature: f64 },

    /// The datum excites a (numerically) zero part of the spectrum.
    #[error("datum not in numerical range: {0}")]
    NotInRange(String),

    /// A user-supplied function evaluated to a non-finite value on an atom
    /// carrying significant weight.
    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    /// The dense desk-scale oracle cannot be materialized.
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    /// A decomposition or an iteration failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, KrylovError>;
