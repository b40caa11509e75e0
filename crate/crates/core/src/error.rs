use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("step size h = {h} outside the admissible range h < {limit} ({rule})")]
    InadmissibleStep {
        h: f64,
        limit: f64,
        rule: &'static str,
    },

    #[error("non-finite {what} at step {step}, position {position:?}")]
    NonFinite {
        what: &'static str,
        step: u64,
        position: Vec<f64>,
    },

    #[error("regularity audit failed: {inequality} at witness {witness:?}")]
    AuditFailure {
        inequality: String,
        witness: Vec<f64>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge: last estimates {previous} and {last}")]
    QuadratureDiverged { previous: f64, last: f64 },

    #[error("chain {chain}: {source}")]
    Chain { chain: u64, source: Box<Error> },

    #[error("{0}")]
    NotApplicable(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    /// Strips any `Chain` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Chain { source, .. } => source.root(),
            other => other,
        }
    }
}
