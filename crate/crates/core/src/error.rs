use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown cluster id {0}")]
    UnknownCluster(u32),

    #[error("target success fraction {target} unreachable: estimate at p=1 is {at_one}")]
    Unreachable { target: f64, at_one: f64 },

    #[error("missing theta estimate for (k={k}, t={t})")]
    MissingEntry { k: usize, t: usize },

    #[error("empty lambda grid")]
    EmptyGrid,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
