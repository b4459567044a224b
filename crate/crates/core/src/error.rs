use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integral or series did not reach the requested tolerance.
    /// `estimate` is the best value obtained and `error_bound` its estimated error.
    #[error("accuracy not reached: estimate {estimate:e} with error bound {error_bound:e} ({context})")]
    Accuracy {
        estimate: f64,
        error_bound: f64,
        context: String,
    },

    /// A method was requested outside the cases it covers.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
