use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample times must be strictly increasing (t[{index}] = {prev} then {next})")]
    NonIncreasingTimes { index: usize, prev: f64, next: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("at least two snapshots are required, got {0}")]
    TooFewSnapshots(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("reference matrix has zero norm")]
    ZeroReference,

    #[error("non-finite result while evaluating {0}")]
    NonFiniteResult(&'static str),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("damped system is rank deficient; increase the damping")]
    RankDeficient,

    #[error("improvement-ratio denominator is not positive ({0})")]
    NonPositiveDenominator(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("solver stagnated after {rejections} consecutive rejected steps (objective {objective:e})")]
    Stagnation { rejections: usize, objective: f64 },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
