use thiserror::Error;

/// Errors raised by the link models and the Monte Carlo machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a type invariant (bad geometry, spacing below λ/2, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// An argument outside the domain of a formula, e.g. the K0 form at zero separation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method stopped before meeting its tolerance.
    #[error("{what} did not converge (error estimate {estimate:e})")]
    NumericFailure { what: String, estimate: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of a numeric method rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFailure { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
