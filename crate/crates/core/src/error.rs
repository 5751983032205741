use thiserror::Error;

/// Errors raised by the modem, channel and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("calibration failure: {0}")]
    CalibrationFailure(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
