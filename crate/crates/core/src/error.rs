use std::io;
use std::path::PathBuf;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("points {0} and {1} coincide; edge weight would be infinite")]
    DuplicatePoint(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {0} has zero degree; normalized Laplacian is undefined")]
    IsolatedVertex(usize),

    #[error("graph is disconnected: vertex {to} is unreachable from vertex {from}")]
    Disconnected { from: usize, to: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("cannot draw {m} samples from {n} vertices")]
    SampleSizeTooLarge { m: usize, n: usize },

    #[error("band is empty for cutoff {0}")]
    EmptyBand(f64),

    #[error("sample set is not a uniqueness set (lower frame bound {0:e})")]
    NotUnique(f64),

    #[error("singular system: decay factor and lower frame bound are both zero")]
    Singular,

    #[error("target has out-of-band energy {0:e}")]
    OutOfBandTarget(f64),

    #[error("history does not cover iteration {iteration} for sensor {sensor}")]
    MissingHistory { sensor: usize, iteration: i64 },

    #[error("truth signal has {available} frames but {needed} are required")]
    InsufficientFrames { needed: usize, available: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("trace value at k = {0} is not positive")]
    NonPositiveError(usize),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("no rows in range")]
    NoRowsInRange,

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 for numerical failures, 1 for everything a
    /// user can fix in the configuration or input files.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotUnique(_)
            | Error::Singular
            | Error::EmptyBand(_)
            | Error::NotSymmetric(_)
            | Error::OutOfBandTarget(_)
            | Error::NonPositiveError(_)
            | Error::Diverged(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
