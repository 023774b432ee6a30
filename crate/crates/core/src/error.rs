//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while evaluating geometry or integrating.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A finite-difference stencil or field evaluation produced a
    /// non-finite value.
    #[error("non-finite value near {point:?}: {context}")]
    NumericalDomain { point: Vec<f64>, context: String },

    /// Degree arithmetic does not make sense (e.g. exterior derivative of a
    /// top-degree form, interior product of a 0-form).
    #[error("degree error: {0}")]
    Degree(String),

    /// Operands live in different dimensions or have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Antisymmetric storage cannot represent the requested shape.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The symplectic matrix is numerically singular at a point.
    #[error("symplectic form degenerate at {point:?} (|det| = {det:.3e})")]
    DegenerateSymplectic { point: Vec<f64>, det: f64 },

    /// An operation that needs the symmetry generator was called on a
    /// system built without one.
    #[error("system has no symmetry generator")]
    MissingSymmetry,

    /// The implicit midpoint solve failed to converge or blew up.
    #[error("integrator failed at step {step}: {detail}")]
    Integration { step: usize, detail: String },

    /// Invalid run configuration (step size, counts, strides).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An internal cross-check failed; indicates a bug, not bad input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
