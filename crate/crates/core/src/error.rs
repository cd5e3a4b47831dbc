use thiserror::Error;

/// Errors raised by geometric and numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("too close to the cut locus: distance {distance:.6} exceeds limit {limit:.6}")]
    CutLocusProximity { distance: f64, limit: f64 },

    #[error("cost is singular at coincident points")]
    SingularCost,

    #[error("degenerate linear system: {0}")]
    Degeneracy(String),

    #[error("no convergence after {iterations} iterations (defect {defect:.3e})")]
    Convergence { iterations: usize, defect: f64 },

    #[error("cannot balance to an h-null pair: {0}")]
    NotNullable(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
