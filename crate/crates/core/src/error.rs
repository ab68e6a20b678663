use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no observations")]
    NoObservations,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid index range {start}..={end} for length {len}")]
    InvalidRange { start: usize, end: usize, len: usize },

    #[error("probability level {0} outside (0, 1)")]
    BetaOutOfRange(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("weight at index {0} is not strictly positive")]
    NonPositiveWeight(usize),

    #[error("loss oracle inconsistent at index {index}: max-min {maxmin} != min-max {minmax}")]
    OracleInconsistent { index: usize, maxmin: f64, minmax: f64 },

    #[error("grid too large: {count} candidate vectors exceed cap {cap}")]
    GridTooLarge { count: u128, cap: u128 },

    #[error("infeasible band at index {0}: lower > upper")]
    InfeasibleBand(usize),

    #[error("solver output not non-decreasing at index {0}")]
    NotMonotone(usize),

    #[error("observation inside open band at index {0}")]
    DataInsideBand(usize),

    #[error("n too small for schedule: {0}")]
    DegenerateSchedule(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid fit: {0}")]
    InvalidFit(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
