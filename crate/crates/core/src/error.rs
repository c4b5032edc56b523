use std::fmt;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input that cannot be processed (too short, silent, constant).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Inconsistent shapes between grids, filters or trajectories.
    #[error("structural error: {0}")]
    Structural(String),
    /// Unsupported or malformed file contents.
    #[error("format error: {0}")]
    Format(String),
    /// Invalid configuration value or unknown key.
    #[error("config error: {0}")]
    Config(String),
    /// A NaN or infinity escaped a computation.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(args: fmt::Arguments<'_>) -> Self {
        Error::Domain(args.to_string())
    }
}

impl From<hound::Error> for Error {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) => Error::Io(io),
            other => Error::Format(other.to_string()),
        }
    }
}
