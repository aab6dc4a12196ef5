use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid qubit targets: {0}")]
    Targets(String),
    #[error("channel is not trace preserving (completeness error {0:.3e})")]
    NotTracePreserving(f64),
    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("operator is not number conserving")]
    NotNumberConserving,
    #[error("summand terms do not commute: {0}")]
    NonCommuting(String),
    #[error("measurement probabilities sum to {total}, expected {expected}")]
    Probability { total: f64, expected: f64 },
    #[error("signal lost: total amplitude {0:.3e} below threshold")]
    SignalLost(f64),
    #[error("degenerate design matrix: {0}")]
    Degenerate(String),
    #[error("summand '{label}': {source}")]
    Summand {
        label: String,
        #[source]
        source: Box<Error>,
    },
    #[error("protocol mismatch: {0}")]
    Protocol(String),
    #[error("invalid config at {path}: {message}")]
    Config { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
