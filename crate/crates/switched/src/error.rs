//! Crate-wide error type.

/// Errors produced by validation, analysis and design routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed argument: non-finite entry, non-positive duration, index out
    /// of range and similar.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Request outside the supported problem size.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Query beyond the end of a finite signal.
    #[error("time {t} is outside the signal horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    /// An iterative kernel failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A statistic needed by a certificate is undefined for the given data.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A requested stabilizing set violates its admissibility condition.
    #[error("invalid set: {0}")]
    InvalidSet(String),

    /// No design satisfies the requested constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A scan hit its configured bound before meeting its target.
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),

    /// A trajectory was checked against a system or signal it was not
    /// produced from.
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
