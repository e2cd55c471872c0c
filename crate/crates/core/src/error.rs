use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("node {0} is not an interior node")]
    NotInterior(usize),

    #[error("quadrature did not reach tolerance {tolerance:e} (last refinement delta {achieved:e})")]
    QuadratureDiverged { tolerance: f64, achieved: f64 },

    #[error("no root bracketed: {0}")]
    NoRoot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
