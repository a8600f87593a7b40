use thiserror::Error;

use crate::algebra::ParseError;
use crate::linalg::LinalgError;
use crate::scalars::ScalarError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("weight {weight} is beyond the computed bound {bound}; raise the weight bound")]
    Truncated { weight: usize, bound: usize },
    #[error("biweight ({p},{m}) needs halo: the weight bound is too tight to certify it")]
    NeedsHalo { p: usize, m: usize },
    #[error("{0}")]
    Characteristic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for failures that indicate a bug rather than bad input or bounds.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

impl From<LinalgError> for Error {
    fn from(e: LinalgError) -> Error {
        Error::Invariant(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
