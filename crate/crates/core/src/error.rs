//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the geometry kernel and the pipeline stages.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// Vector arguments disagree on ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Input configuration is degenerate (dependent points, coincident
    /// vertices, rank-deficient span).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The circumcenter solve produced a non-timelike center; the vertex
    /// set lies too close to an ideal configuration to circumscribe.
    #[error("circumsphere is unbounded for this vertex configuration")]
    UnboundedCircumsphere,

    /// Caller violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An intermediate value of a bound formula left its principal domain.
    /// Carries the name of the failing sub-expression.
    #[error("out of domain in `{expr}`: value {value}")]
    OutOfDomain { expr: &'static str, value: f64 },

    /// The d-schedule solver found no positive solution above its floor.
    #[error("bound schedule infeasible: {0}")]
    Infeasible(String),

    /// Rejection sampling exhausted its trial budget.
    #[error("no good position found for vertex {vertex} after {trials} trials")]
    TrialsExhausted { vertex: usize, trials: usize },

    /// Jitter retries could not restore the separation invariant.
    #[error("separation invariant violated after {attempts} jitter attempts")]
    SeparationViolated { attempts: usize },

    /// An insphere/orientation tie survived exact evaluation and the
    /// index-ordered perturbation rule; carries the offending vertex tuple.
    #[error("unresolved predicate degeneracy on vertices {tuple:?}")]
    PredicateDegeneracy { tuple: Vec<usize> },

    /// A loaded artifact violates a structural invariant.
    #[error("validation failed: {invariant}")]
    Validation { invariant: String },
}

pub type Result<T> = std::result::Result<T, GeomError>;
