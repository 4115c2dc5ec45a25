use thiserror::Error;

/// Errors returned by the channel, optimizer and link-simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("singular channel: {0}")]
    SingularChannel(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
