use thiserror::Error;

/// Errors raised by the simulation laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label history has probability zero under the process")]
    ImpossibleHistory,

    #[error("point {0:?} lies outside the support of both class conditionals")]
    OutsideSupport(Vec<f64>),

    #[error("operation requires dimension {required}, got {actual}")]
    UnsupportedDimension { required: usize, actual: usize },

    #[error("training sample is empty")]
    EmptySample,

    #[error("exact enumeration too large: {0}")]
    EnumerationTooLarge(String),

    #[error("alpha(n) has a pole at n = {0}")]
    PoleAtOne(u64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("argument mismatch: {0}")]
    ArgumentMismatch(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
