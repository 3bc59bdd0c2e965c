use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("document contains no tokens")]
    EmptyDocument,

    #[error("document contains no word tokens; averages are undefined")]
    DegenerateDocument,

    #[error("line {line}: unknown tag {tag:?} (strict tag mode)")]
    UnknownTag { line: usize, tag: String },

    #[error("tag map line {line}: {message}")]
    TagMap { line: usize, message: String },

    #[error("line {line}: unknown category code {code:?}")]
    UnknownCategory { line: usize, code: String },

    #[error("duplicate doc_id {doc_id:?} on lines {first} and {second}")]
    DuplicateDocId {
        doc_id: String,
        first: usize,
        second: usize,
    },

    #[error("category {code:?} has {count} member(s); at least 2 are required")]
    InsufficientClass { code: String, count: usize },

    #[error("at least two categories are required to fit a discriminant, found {0}")]
    TooFewClasses(usize),

    #[error("feature column(s) with zero within-class variance: {}", .0.join(", "))]
    ZeroVariance(Vec<String>),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("within-class scatter is singular after regularization; offending column(s): {}", .0.join(", "))]
    SingularScatter(Vec<String>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("model file version {found} is not supported (expected {expected})")]
    IncompatibleModel { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("category {0:?} is not one of the model's classes")]
    UnknownLabel(String),

    #[error("merge map has no entry for label {0:?}")]
    Mapping(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
