use thiserror::Error;

/// Errors produced by the simulation and verification toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("recording a {requested}-step walk exceeds the in-memory budget of {limit} steps; use streaming mode")]
    RecordingBudget { requested: usize, limit: usize },
    #[error("operation needs a recorded trajectory with per-step records")]
    MissingStepRecords,
    #[error("decomposition record covers {record} steps but trajectory has {trajectory}")]
    RecordMismatch { record: usize, trajectory: usize },
    #[error("inconsistent step context: {0}")]
    InconsistentStep(String),
    #[error("sequence of length {len} too short for window (n = {n}, j = {j})")]
    WindowOutOfRange { len: usize, n: usize, j: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("exact exit-time solve failed: {0}")]
    SingularSystem(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed overrides file {path}: {reason}")]
    MalformedOverrides { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
