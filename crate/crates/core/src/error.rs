use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
///
/// Variants are grouped by the exit code the command-line front end maps
/// them to: configuration problems (2), data problems (3) and numerical
/// failures (4).
#[derive(Debug, Error)]
pub enum Error {
    // numerics
    #[error("matrix is singular: pivot {pivot:e} below threshold {threshold:e} at column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("length mismatch: {what} (expected {expected}, got {actual})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),

    // dataset
    #[error("aggregation produced an empty series: length {length} < factor {factor}")]
    EmptyResult { length: usize, factor: usize },
    #[error("insufficient data: series length {length} < horizon {horizon} + lead time {lead_time}")]
    InsufficientData {
        length: usize,
        horizon: usize,
        lead_time: usize,
    },
    #[error("split partition `{0}` received no samples")]
    EmptySplit(&'static str),
    #[error("no same-phase history before time {0}")]
    NoHistory(i64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed data: {0}")]
    MalformedData(String),

    // model
    #[error("invalid learning-rate range: lr_min {lr_min} > lr_max {lr_max}")]
    InvalidRange { lr_min: f64, lr_max: f64 },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergenceDetected { epoch: usize },
    #[error("unsupported model file: {0}")]
    ModelFormat(String),

    // fusion
    #[error("fusion weights could not be solved after {attempts} ridge escalations")]
    UnsolvableWeights { attempts: usize },

    // evaluation
    #[error("climatology RMSE is zero; skill score is undefined")]
    DegenerateClimatology,
    #[error("misaligned samples: {0}")]
    MisalignedSamples(String),
    #[error("model pool of {pool} is smaller than requested ensemble size {requested}")]
    PoolTooSmall { pool: usize, requested: usize },

    // io
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with a location such as `lead_time=5 model=3`.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, with all context layers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 2 config, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::InvalidConfig(_) | Error::InvalidRange { .. } | Error::ModelFormat(_) => 2,
            Error::UnsolvableWeights { .. }
            | Error::DivergenceDetected { .. }
            | Error::SingularMatrix { .. } => 4,
            _ => 3,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
