use thiserror::Error;

/// Errors raised by the norm, geometry, covering and entropy routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid norm specification: {0}")]
    InvalidSpec(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver stopped before reaching its tolerance.
    #[error("{what} did not converge (bracket width {width:e})")]
    NoConvergence { what: &'static str, width: f64 },

    /// The norm specification broke an assumption the solvers rely on.
    #[error("norm specification defect: {0}")]
    SpecDefect(String),

    #[error("resource guard tripped: {0}")]
    Guard(String),

    /// Two routes that must agree produced different numbers.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    /// A constructed covering failed its sampled certificate.
    #[error("certification failed: {0}")]
    Certification(String),

    #[error("no two-sided bound is available: {0}")]
    NoClaim(String),
}

pub type Result<T> = std::result::Result<T, Error>;
