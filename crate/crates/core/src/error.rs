use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantity that must be real came out with a non-negligible imaginary
    /// part. Always an implementation bug, never an input problem.
    #[error("{what} has imaginary residue {residue:e}")]
    NonReal { what: &'static str, residue: f64 },

    #[error("state norm {norm} is outside the accepted tolerance")]
    Norm { norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed state file: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
