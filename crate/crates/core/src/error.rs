use thiserror::Error;

/// Errors raised by state construction, channels, estimators and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate normalization: 2 + γ^n + conj(γ)^n vanishes")]
    DegenerateNormalization,

    #[error("{what} supports at most {max} qubits/sites, got {n}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("incomplete subset map: expected {expected} entries, got {got}")]
    IncompleteMap { expected: usize, got: usize },

    #[error("unphysical distribution: entry {index} = {value:e}")]
    Unphysical { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("wrong distribution kind: expected {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },

    #[error("singular correction: {0}")]
    Singular(String),

    #[error("rank-deficient forward matrix (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("two-site state must hold exactly 2 atoms, got {0}")]
    WrongParticleNumber(u32),

    #[error("degenerate fit grid: {0}")]
    DegenerateGrid(String),

    #[error("linear program: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
