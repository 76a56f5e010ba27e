use thiserror::Error;

/// Errors raised by the numerical and configuration layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of the gamma function at z = {0}")]
    Pole(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("series did not converge: {0}")]
    NonConvergence(String),
    #[error("no feasible contour: {0}")]
    Infeasible(String),
    #[error("imaginary residual {residual:e} too large for value {value:e}")]
    ImaginaryResidual { value: f64, residual: f64 },
    #[error("truncation cap of {cap} terms reached with error {achieved:e} > {target:e}")]
    TruncationCap { cap: usize, target: f64, achieved: f64 },
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
