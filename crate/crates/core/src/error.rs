use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {width}-qubit register")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("gate {kind} repeats qubit {qubit}")]
    DuplicateQubit { kind: &'static str, qubit: usize },

    #[error("gate {kind} expects {expected} qubit(s), got {got}")]
    GateArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("rotation gate {0} requires an angle")]
    MissingAngle(&'static str),

    #[error("gate {0} does not take an angle")]
    UnexpectedAngle(&'static str),

    #[error("reset cannot be applied as a unitary; use an exact or sampling runner")]
    ResetInUnitary,

    #[error("circuit requires {required} qubits, exceeding the configured maximum of {max}")]
    WidthExceeded { required: usize, max: usize },

    #[error("circuit has no measured qubits")]
    NothingMeasured,

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probability {name}={value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("feature {index} is constant (min == max == {value}); cannot scale")]
    ConstantFeature { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("vector has zero norm; amplitude encoding is undefined")]
    ZeroNorm,

    #[error("amplitude {index} is negative ({value})")]
    NegativeAmplitude { index: usize, value: f64 },

    #[error("vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate bounds: min {min} must be below max {max}")]
    DegenerateBounds { min: f64, max: f64 },

    #[error("row {row}: non-positive {column} ({value}) in a log or ratio argument")]
    NonPositivePrice {
        row: usize,
        column: &'static str,
        value: f64,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}: {message}")]
    BadRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
