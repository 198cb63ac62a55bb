use thiserror::Error;

use crate::verify::Rejection;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("equality matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("problem contains a non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),

    #[error("no nonsingular B - lambda*A found after {0} attempts")]
    SingularityExhausted(usize),

    #[error("key is bound to a different problem")]
    KeyProblemMismatch,

    #[error("key has already been used for an encryption")]
    KeyReuse,

    #[error("verification failed: {0}")]
    VerificationFailed(Rejection),

    #[error("matrix is numerically singular: {0}")]
    SingularMatrix(&'static str),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("solver certificate failed its own check: {0}")]
    SelfCheckFailed(Rejection),

    #[error("problem too large for vertex enumeration (n = {n}, limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("connection failed: {0}")]
    ConnectionFailed(#[source] std::io::Error),

    #[error("server error {code}: {message}")]
    Server { code: u16, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
