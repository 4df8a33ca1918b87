use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A region, point or support lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is malformed (non-finite values, shape mismatch).
    #[error("data error: {0}")]
    Data(String),

    /// A metric lost positive-definiteness.
    #[error("degenerate metric at node {node:?}: {detail}")]
    Degeneracy { node: Vec<usize>, detail: String },

    /// The mollification scale is not resolved by the grid.
    #[error("resolution error: eps = {eps} is below 2h = {two_h}")]
    Resolution { eps: f64, two_h: f64 },

    /// An operation was called on data outside its contract.
    #[error("contract error: {0}")]
    Contract(String),

    /// A rate fit could not be computed.
    #[error("fit error: {0}")]
    Fit(String),

    /// An iterative solver hit its iteration cap.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The discrete solution left the positive cone.
    #[error("maximum principle violated at node {node:?}: u = {value}")]
    MaximumPrinciple { node: Vec<usize>, value: f64 },

    /// Bad arguments (empty batteries, invalid exponents, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
