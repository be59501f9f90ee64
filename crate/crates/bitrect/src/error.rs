use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix text contains no data lines")]
    EmptyInput,

    #[error("line {line}: row length differs from previous rows")]
    RaggedLine { line: usize },

    #[error("line {line}, column {col}: illegal character {ch:?} (expected '0' or '1')")]
    IllegalChar { line: usize, col: usize, ch: char },

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix has no 1-entries")]
    EmptyPattern,

    #[error("instance too large: {cells} 1-cells exceeds limit {limit}")]
    TooLarge { cells: usize, limit: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("generator failed to produce a valid instance after {retries} retries")]
    DegenerateAfterRetries { retries: usize },

    #[error("assignment violates rectangle closure at cell ({0}, {1})")]
    ClosureViolation(usize, usize),

    #[error("product size {cells} cells exceeds the {limit}-cell guard")]
    SizeOverflow { cells: u128, limit: u128 },

    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("external solver failure: {0}")]
    SolverFailure(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
