//! Extractive summarization with syntactic compression.
//!
//! Sentences arrive as constituency trees. [`rules`] enumerates deletable
//! constituents, [`oracle`] derives extraction and compression supervision
//! from reference summaries, [`model`] learns both jointly, and [`pipeline`]
//! turns a trained model into summaries and evaluation reports.

pub mod corpus;
pub mod error;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod rouge;
pub mod rules;
pub mod synthetic;
pub mod treebank;

pub use corpus::{Document, DocumentRecord};
pub use error::{Error, Result};
pub use oracle::{Label, LabeledOption, OracleCandidate, OracleConfig};
pub use rouge::{PreprocessConfig, RougeScore};
pub use rules::{CompressionOption, RuleId};
pub use treebank::{SentenceTree, Span};
