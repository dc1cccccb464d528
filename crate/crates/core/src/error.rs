use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("system too large: L = {l} exceeds the configured maximum {max}")]
    TooLarge { l: usize, max: usize },
    #[error("pole hit: {0}")]
    Pole(String),
    #[error("series did not converge: {0}")]
    Divergent(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("branch tracking failed at angle {angle:.6}: {detail}")]
    Branch { angle: f64, detail: String },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
