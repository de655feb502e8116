use thiserror::Error;

/// Errors produced by point generation, cone construction, the solver and the
/// certificate tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("points are not unisolvent: {0}")]
    NotUnisolvent(String),

    #[error("weight {block} is negative ({value:e}) at point {point}: points not inside the domain")]
    NegativeWeight { block: usize, point: usize, value: f64 },

    #[error("point is not in the interior of the cone")]
    NotInterior,

    #[error("matrix is not positive semidefinite (block {block}, eigenvalue {eigenvalue:e})")]
    NotPsd { block: usize, eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown polynomial '{0}'")]
    UnknownPolynomial(String),

    #[error("polynomial degree {found} exceeds the supported degree {max}")]
    Degree { found: usize, max: usize },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
