use thiserror::Error;

use crate::stream::StreamError;

/// Errors raised by the mechanisms, the transform and the stability lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("noise scale must be nonnegative, got {0}")]
    NegativeScale(f64),
    #[error("horizon of {0} steps exceeded")]
    HorizonExceeded(usize),
    #[error("no budget split satisfies the target: {0}")]
    Infeasible(String),
    #[error("streams are not neighbors: {0}")]
    NotNeighbors(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad(msg: impl Into<String>) -> Error {
    Error::BadParameter(msg.into())
}
