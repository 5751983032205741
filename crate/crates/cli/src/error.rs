use std::fmt;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, inconsistent arguments. Exit 2.
    Usage(String),
    /// I/O or numerical failure while running. Exit 3.
    Runtime(String),
    /// `--check` found results that miss the reference numbers. Exit 4.
    Check(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::Check(failed) => write!(f, "check failed: {}", failed.join("; ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<entromodem::Error> for CliError {
    fn from(e: entromodem::Error) -> Self {
        match e {
            entromodem::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("json error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
