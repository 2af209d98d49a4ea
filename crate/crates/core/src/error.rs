use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("table construction failed: {0}")]
    Construction(String),

    #[error("table is not strictly convex: {0}")]
    NotConvex(String),

    #[error("point lies outside the table: {0}")]
    OutsideTable(String),

    #[error("ambiguous branch: {0}")]
    AmbiguousBranch(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("grazing trajectory: {0}")]
    Grazing(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type KbResult<T> = Result<T, KbError>;
