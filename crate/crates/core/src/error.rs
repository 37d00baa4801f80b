use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model token `{token}`: {reason}")]
    ModelToken { token: String, reason: String },

    #[error("empty model specification")]
    EmptyModel,

    #[error("strength {t} is out of range for a model with {k} factors")]
    Strength { t: usize, k: usize },

    #[error("invalid interaction: {0}")]
    Interaction(String),

    #[error("invalid array: {0}")]
    Array(String),

    #[error("array file, line {line}: {reason}")]
    ArrayFile { line: usize, reason: String },

    #[error("row {row} is out of range for an array of {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },

    #[error(
        "coverage index for {interactions} interactions needs about {required} bytes, \
         over the budget of {budget} bytes"
    )]
    Capacity {
        interactions: u64,
        required: u64,
        budget: u64,
    },

    #[error("array has no rows, so it has no neighbors")]
    NoNeighbor,

    #[error("array is already locating; no improving neighbor exists")]
    AlreadyLocating,

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("arithmetic overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
