use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("not enough nodes: requested {requested} customers but the file has {available}")]
    Cardinality { requested: usize, available: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("exact TSP limited to {limit} nodes, got {requested}")]
    Capacity { limit: usize, requested: usize },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("operator bank group has no positive weight")]
    DegenerateBank,

    #[error("division by zero: {0}")]
    Division(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
