use std::path::PathBuf;

use thiserror::Error;

use crate::treebank::Span;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid span [{start}, {end}) for a sentence of {len} tokens")]
    InvalidSpan {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("deletion spans {a} and {b} overlap without nesting")]
    OverlappingSpans { a: Span, b: Span },

    /// A rule produced two options that partially overlap. This is a bug in
    /// the rule engine, never a property of the input.
    #[error("compression options {a} and {b} partially overlap")]
    OptionOverlap { a: Span, b: Span },

    #[error("document {doc_id}: need {needed} sentences, found {found}")]
    InsufficientSentences {
        doc_id: String,
        needed: usize,
        found: usize,
    },

    #[error("exhaustive search refused: {count} subsets exceeds the limit of {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("every scoreable sentence is already selected")]
    AllSelected,

    #[error("oracle index {index} out of range for {scoreable} scoreable sentences")]
    OracleIndex { index: usize, scoreable: usize },

    #[error("line {line}: {message}")]
    CorpusLine { line: usize, message: String },

    #[error("document {doc_id}, sentence {sent_index}: tokens do not match tree leaves")]
    TokenMismatch { doc_id: String, sent_index: usize },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short name used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidSpan { .. } => "invalid_span",
            Error::OverlappingSpans { .. } => "overlapping_spans",
            Error::OptionOverlap { .. } => "option_overlap",
            Error::InsufficientSentences { .. } => "insufficient_sentences",
            Error::GuardExceeded { .. } => "guard_exceeded",
            Error::EmptyCorpus => "empty_corpus",
            Error::AllSelected => "all_selected",
            Error::OracleIndex { .. } => "oracle_index",
            Error::CorpusLine { .. } => "corpus_line",
            Error::TokenMismatch { .. } => "token_mismatch",
            Error::ModelFormat(_) => "model_format",
            Error::ModelVersion { .. } => "model_version",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
