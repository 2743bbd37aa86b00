use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum AfqmcError {
    /// Malformed input files or invalid parameters.
    #[error("invalid input: {0}")]
    Input(String),

    /// Dimension caps exceeded or incompatible shapes.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Numerical failure: non-convergence, singular overlap, collapsed
    /// walker population.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AfqmcError>;
