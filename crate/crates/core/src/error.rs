use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured maximum {max} (set INVREP_MAX_DIM to raise it)")]
    DimensionOverflow { requested: u128, max: u128 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("no invariant states: {0}")]
    EmptySubspace(String),

    #[error("no invariant vector in V_{lam} ⊗ V_{mu}: partitions are not dual")]
    NoInvariantVector { lam: String, mu: String },

    #[error("numerical kernel dimension {numeric} disagrees with exact count {exact}")]
    RankMismatch { numeric: usize, exact: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
