use thiserror::Error;

/// Errors raised by the constitutive layer, the solver and the CLI front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HysteraError {
    /// An argument fell outside the domain where the relation is defined.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// Adaptive quadrature or a root search failed to reach its tolerance.
    #[error("numeric failure in {what}: {detail}")]
    Numeric { what: &'static str, detail: String },

    /// The closure relations violate the monotonicity they are required to have.
    #[error("constitutive inconsistency: {0}")]
    Inconsistent(String),

    /// A nodal diffusivity was not strictly positive.
    #[error("degenerate diffusivity {value:e} at node {node}; regularization (delta, mu) must be positive")]
    Degenerate { node: usize, value: f64 },

    /// Field vectors or matrices with mismatched sizes.
    #[error("invalid usage: {0}")]
    Usage(String),

    /// Initial data or bounds inputs violate a precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A non-finite value appeared inside the solver state.
    #[error("state corruption: {0}")]
    Corrupted(String),

    /// The fixed-point map failed to contract within the iteration budget.
    #[error("fixed-point iteration did not contract at t = {t}: {detail}")]
    NonContraction { t: f64, detail: String },

    /// Time-step halving exhausted its budget.
    #[error("aborted at t = {t} after {halvings} step halvings: {detail}")]
    Aborted { t: f64, halvings: u32, detail: String },

    /// Invalid configuration text.
    #[error("config error (line {line}): {detail}")]
    Config { line: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HysteraError {
    fn from(e: std::io::Error) -> Self {
        HysteraError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HysteraError>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> HysteraError {
    HysteraError::Domain {
        what,
        detail: detail.into(),
    }
}

pub(crate) fn numeric(what: &'static str, detail: impl Into<String>) -> HysteraError {
    HysteraError::Numeric {
        what,
        detail: detail.into(),
    }
}
