use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular system: pivot {pivot:e} at row {row} is below {threshold:e}")]
    Singular { row: usize, pivot: f64, threshold: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument `{field}`: {message}")]
    InvalidArgument { field: &'static str, message: String },

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse { row: usize, column: String, message: String },

    #[error("label at row {row} is {value}, expected 0 or 1")]
    LabelDomain { row: usize, value: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("class {class} has {count} members, need at least {required}")]
    InsufficientClass { class: u8, count: usize, required: usize },

    #[error("optimization diverged: {0}")]
    Divergence(String),

    #[error("{0}")]
    Format(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("algorithm step {step} ({stage}) failed: {source}")]
    Step {
        step: u8,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("experiment cell dataset={dataset} method={method} fold={fold} seed={seed} failed: {source}")]
    Cell {
        dataset: String,
        method: String,
        fold: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
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
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument { field, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Tags an error with the pipeline step that produced it.
    pub fn at_step(self, step: u8, stage: &'static str) -> Self {
        Error::Step { step, stage, source: Box::new(self) }
    }
}
