use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("no convergence in {context}: {detail}")]
    NonConvergence { context: String, detail: String },
    #[error("argument outside the domain of validity: {0}")]
    Domain(String),
    #[error("truncation level too small: {0}")]
    Truncation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{} of {total} trials failed; first at trial {}: {first}", indices.len(), indices.first().copied().unwrap_or(0))]
    Trials { total: usize, indices: Vec<usize>, first: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
