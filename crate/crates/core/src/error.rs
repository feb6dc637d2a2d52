use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("profile validation failed: {0}")]
    Validation(String),

    #[error("numerical blow-up at t = {time}: {what}")]
    Blowup { time: f64, what: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-uniform schedule: {0}")]
    NonUniformSchedule(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("incomplete report: {0}")]
    Incomplete(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
