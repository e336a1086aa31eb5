use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("modulus {0} is not prime")]
    NotPrime(u32),

    #[error("symbol {symbol} out of range for modulus {modulus}")]
    SymbolOutOfRange { symbol: u32, modulus: u32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("enumeration budget exceeded: {needed} states > budget {budget}; {hint}")]
    Budget {
        needed: u128,
        budget: u128,
        hint: &'static str,
    },

    #[error("impossible prefix at index {index}: conditioning event has zero probability")]
    ImpossiblePrefix { index: usize },

    #[error("replay failed: {0}")]
    Replay(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for invalid input, 3 for exceeded budgets, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPowerOfTwo(_)
            | Error::NotPrime(_)
            | Error::SymbolOutOfRange { .. }
            | Error::Dimension(_)
            | Error::InvalidPmf(_)
            | Error::Config(_) => 2,
            Error::Budget { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
