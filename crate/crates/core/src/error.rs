use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("total degree {0} is odd, no perfect matching of half-edges exists")]
    OddTotalDegree(u64),

    #[error("vertex {vertex} has degree {degree}, expected {expected}")]
    InvalidDegree {
        vertex: usize,
        degree: u32,
        expected: &'static str,
    },

    #[error("invalid component length {length} for a {kind}")]
    InvalidLength { length: usize, kind: &'static str },

    #[error("brute-force enumeration limited to {max} sites, got {got}")]
    TooLarge { max: usize, got: usize },

    #[error("invalid degree distribution: {0}")]
    InvalidPmf(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("malformed graph file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
