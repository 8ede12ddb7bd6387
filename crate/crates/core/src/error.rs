use std::io;

use crate::types::Method;

/// Errors produced by scoring, evaluation, ingestion and the toy model.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("probabilities sum to {sum}, expected 1 within {tolerance}")]
    Normalization { sum: f64, tolerance: f64 },

    #[error("vocabulary must contain at least 2 entries, got {0}")]
    EmptyVocabulary(usize),

    #[error("cannot aggregate an empty list of token scores")]
    EmptyScores,

    #[error("k_percent must lie in (0, 100], got {0}")]
    InvalidK(f64),

    #[error("sigma_floor must be positive and finite, got {0}")]
    InvalidSigmaFloor(f64),

    #[error("record `{id}`: zlib detector requires text")]
    MissingText { id: String },

    #[error("record `{id}`: missing reference `{name}`")]
    MissingReference { id: String, name: String },

    #[error("record `{id}`: reference `{name}` has no neighbor losses")]
    EmptyNeighbors { id: String, name: String },

    #[error("record `{id}`: invalid record: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("record `{id}`: detector produced a non-finite score")]
    NonFiniteScore { id: String },

    #[error("evaluation needs at least one member and one nonmember (got {n_pos} members, {n_neg} nonmembers)")]
    DegenerateLabels { n_pos: usize, n_neg: usize },

    #[error("method `{0}` cannot be applied per window")]
    UnsupportedOnlineMethod(Method),

    #[error("method `{0}` has no k or variant to sweep")]
    UnsupportedSweepMethod(Method),

    #[error("window size must be at least 1")]
    InvalidWindow,

    #[error("online dataset: {0}")]
    InsufficientPool(String),

    #[error("corpus has {len} symbols, need at least {needed}")]
    CorpusTooShort { len: usize, needed: usize },

    #[error("text has {0} symbols, need at least 2")]
    TextTooShort(usize),

    #[error("benchmark corpus: {0}")]
    InsufficientCorpus(String),

    #[error("invalid model configuration: {0}")]
    InvalidModel(String),

    #[error("line {line}: schema `{found}` is not `{expected}`")]
    SchemaVersionMismatch {
        line: usize,
        found: String,
        expected: &'static str,
    },

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: array lengths differ (logp {logp}, mu {mu}, sigma {sigma})")]
    LengthMismatch {
        line: usize,
        logp: usize,
        mu: usize,
        sigma: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the input data rather than by the caller or
    /// the environment. The CLI maps these to exit code 2.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Json(_))
    }
}
