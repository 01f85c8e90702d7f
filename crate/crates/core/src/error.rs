use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the saliency toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("axis is not a unit pure quaternion (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("kernel {kernel:?} is larger than field {field:?}")]
    KernelTooLarge {
        kernel: (usize, usize),
        field: (usize, usize),
    },

    #[error("amplitude spectrum has a negative entry ({value}) at {at:?}")]
    NegativeAmplitude { value: f64, at: (usize, usize) },

    #[error("eigenaxis at {at:?} has norm {norm}, expected 1")]
    NonUnitEigenaxis { norm: f64, at: (usize, usize) },

    #[error("ground truth has no positive pixels")]
    EmptyGroundTruth,

    #[error("oracle scale selection requires a ground-truth mask")]
    MissingGroundTruth,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid pattern spec: {0}")]
    InvalidPattern(String),

    #[error("image decode error: {0}")]
    Decode(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
