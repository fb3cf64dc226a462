use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size N = {0} is too small; the 4-point kernel needs N >= 4")]
    GridTooSmall(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("bisection bracket [{lo:e}, {hi:e}] is invalid: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: String },
    #[error("run at dt = {dt:e} stayed indeterminate after {steps} steps")]
    HorizonExhausted { dt: f64, steps: usize },
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be non-negative and finite, got {value}"),
        })
    }
}

pub(crate) fn check_grid(n: usize) -> Result<()> {
    if n < 4 {
        Err(Error::GridTooSmall(n))
    } else {
        Ok(())
    }
}
