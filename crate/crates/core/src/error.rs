use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported extension degree m = {0} (supported: 1..={max})", max = crate::gf2m::MAX_DEGREE)]
    UnsupportedDegree(u32),

    #[error("degenerate code: {0}")]
    DegenerateCode(String),

    /// Raised when an internal consistency check on field or polynomial
    /// arithmetic fails. Always a bug, never bad user input.
    #[error("arithmetic corruption: {0}")]
    ArithmeticCorruption(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
