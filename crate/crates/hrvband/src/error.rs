use thiserror::Error;

/// Error type shared across the crate.
///
/// The three variants map onto the CLI exit codes: `Input` -> 1,
/// `Config` -> 2, `Internal` -> 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Problems with input data: unreadable files, malformed lines,
    /// non-monotone peak times, series too short for the requested
    /// operation.
    #[error("input error: {0}")]
    Input(String),

    /// Invalid configuration or parameters: degenerate bands, bad steps,
    /// infeasible segment counts.
    #[error("config error: {0}")]
    Config(String),

    /// Violated internal invariant. Seeing this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Process exit code associated with this error kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 1,
            Error::Config(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
