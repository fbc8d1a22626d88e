use thiserror::Error;

/// Errors raised by model construction, region evaluation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed model file: {0}")]
    Malformed(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probabilities sum to {sum}, not 1 (tolerance {tol:e})")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("empty coordinate set")]
    EmptyCoords,

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("{which} alphabet size {size} exceeds cap {cap}")]
    CapExceeded {
        which: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("Markov chain {chain} violated (max deviation {violation:e})")]
    MarkovViolated { chain: String, violation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid has {points} points, above the limit {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("codebook needs 2^{bits} codewords, above the limit 2^{limit}")]
    CodebookTooLarge { bits: u32, limit: u32 },

    #[error("state space of {cells} cells exceeds the enumeration limit {limit}")]
    StateSpaceTooLarge { cells: u128, limit: u128 },

    #[error("sequence length mismatch: {0}")]
    LengthMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
