use thiserror::Error;

/// Errors raised by model construction, analysis and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no enabled edge from location `{location}` on letter `{letter}`")]
    TotalityViolation { location: String, letter: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("power iteration did not converge (last residual {residual:e})")]
    ConvergenceFailure { residual: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error in {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
