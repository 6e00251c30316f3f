use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the physical or mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value that cannot be used; `key` names the offending field.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    /// The Liouvillian has more than one stationary state (e.g. a laser is off
    /// and population is trapped in a dark manifold).
    #[error("steady state is not unique: null space has dimension {dimension}")]
    NonUniqueSteadyState { dimension: usize },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("oscillator is undamped or anti-damped (alpha = {alpha})")]
    UndampedOscillator { alpha: f64 },

    /// Requested spectral resolution is finer than the record length allows.
    #[error("resolution bandwidth {rbw_hz} Hz is below the {min_hz} Hz the record length allows")]
    Resolution { rbw_hz: f64, min_hz: f64 },

    /// The fit Jacobian is rank deficient; the named parameters are not
    /// constrained by the data.
    #[error("non-identifiable parameters: {}", parameters.join(", "))]
    NonIdentifiable { parameters: Vec<String> },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("I/O: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
