use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Cholesky pivot fell below the relative floor; the system is
    /// (numerically) rank deficient.
    #[error("singular system: pivot {pivot:e} at position {position} below floor {floor:e}")]
    SingularSystem {
        position: usize,
        pivot: f64,
        floor: f64,
    },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("iteration limit of {limit} reached")]
    IterationLimit { limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dictionary column {0} is identically zero")]
    ZeroColumnInDictionary(usize),

    #[error("data matrix has zero Frobenius norm")]
    ZeroDataMatrix,

    #[error("regularization path for column {0} has no cardinality-0 entry")]
    MissingZeroEntry(usize),

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
