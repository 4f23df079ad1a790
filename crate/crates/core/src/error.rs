use std::io;

use thiserror::Error;

/// Errors raised anywhere in the aspect-extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate word `{word}` on line {line}")]
    DuplicateWord { word: String, line: usize },

    #[error("line {line}: expected {expected} vector components, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },

    #[error("header announced {expected} words but {found} rows were read")]
    VocabSizeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("no words resolved in the vector store (missing: {})", .missing.join(", "))]
    NoneResolved { missing: Vec<String> },

    #[error("label `{label}` has no query term in the vector store (tried: {})", .terms.join(", "))]
    UnresolvedLabel { label: String, terms: Vec<String> },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
