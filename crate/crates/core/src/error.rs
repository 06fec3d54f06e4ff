use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, allowed {allowed:e})")]
    NotPsd { min_eigenvalue: f64, allowed: f64 },

    #[error("map is not completely positive (Choi min eigenvalue {min_eigenvalue:e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(what: &str, left: usize, right: usize) -> Error {
    Error::Shape(format!("{what}: {left} vs {right}"))
}
