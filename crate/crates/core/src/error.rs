use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry mismatch: {0}")]
    Geometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error("filter `{name}` failed validation: {reason}")]
    InvalidFilter { name: String, reason: String },

    #[error("level {level} out of range [{lo}, {hi}]")]
    LevelOutOfRange { level: i32, lo: i32, hi: i32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bisection did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("atom violation: {0}")]
    AtomViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
