use std::path::PathBuf;

use crate::harness::backend::BackendError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file starts with a UTF-8 byte-order mark; save it without BOM")]
    Bom { path: PathBuf },

    #[error("{path}: line {line}: invalid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },

    #[error("{path}: line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: no examples")]
    NoExamples { path: PathBuf },

    #[error("duplicate example id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("line {line}: unknown label {label:?}; expected one of {allowed:?}")]
    UnknownLabel {
        label: String,
        line: usize,
        allowed: Vec<String>,
    },

    #[error("invalid label set: {0}")]
    LabelSet(String),

    #[error("no parallel pairs: none of the {examined} examples has an English side")]
    NoParallelPairs { examined: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("all {0} pairs failed while profiling")]
    AllPairsFailed(usize),

    #[error("tokenizer: {0}")]
    Tokenizer(String),

    #[error("alignment corpus pair {pair}: {message}")]
    AlignmentInput { pair: usize, message: String },

    #[error("alignment model is empty")]
    EmptyModel,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid prompt spec: {0}")]
    PromptSpec(String),

    #[error("cannot render prompt: {0}")]
    Render(String),

    #[error("retrieval pool intersects the evaluated split on ids {0:?}")]
    Leakage(Vec<String>),

    #[error("backend: {0}")]
    Backend(#[from] BackendError),

    #[error("every example failed at the backend ({failed} of {total}); last error: {last}")]
    BackendUnreachable {
        failed: usize,
        total: usize,
        last: String,
    },

    #[error("paired comparison: {0}")]
    Pairing(String),

    #[error("statistics: {0}")]
    Stats(String),

    #[error("profile has no baseline accuracy; run a baseline evaluation first")]
    MissingBaseline,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
