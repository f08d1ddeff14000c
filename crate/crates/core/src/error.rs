use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: rank {rank} < {size}")]
    Singular { rank: usize, size: usize },
    #[error("matrix is not hermitian")]
    NotHermitian,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("generator count {0} exceeds the cap of {cap}", cap = crate::grassmann::MAX_GENERATORS)]
    TooManyGenerators(usize),
    #[error("not admissible: {0}")]
    Inadmissible(String),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("level {needed} exceeds n_max = {n_max}")]
    LevelOverflow { needed: usize, n_max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
