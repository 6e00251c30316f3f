use std::fmt;

/// Failure of a run, split by exit code: configuration problems exit with 2,
/// numerical and I/O failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config { key: String, reason: String },
    Numerical(ionfluor::Error),
    Io(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { key, reason } => write!(f, "invalid configuration `{key}`: {reason}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "I/O: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ionfluor::Error> for CliError {
    fn from(e: ionfluor::Error) -> Self {
        match e {
            ionfluor::Error::Config { key, reason } => CliError::Config { key, reason },
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
