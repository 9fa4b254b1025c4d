use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A target value (e.g. Kendall's tau) cannot be attained by the family.
    #[error("range error: {0}")]
    Range(String),

    #[error("dimension {d} exceeds the supported maximum {max}")]
    DimensionCap { d: usize, max: usize },

    /// A computation produced NaN or an infinity where a finite value is required.
    #[error("non-finite result in {0}")]
    NonFinite(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    /// Two independent evaluation routes disagree beyond tolerance.
    #[error("numerical cross-check failed: {0}")]
    CrossCheck(String),

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Returns a domain error unless `cond` holds.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}
