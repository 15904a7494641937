use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no triples")]
    NoTriples,

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("embedding format error at line {line}: {message}")]
    EmbeddingFormat { line: usize, message: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("triple set {0:?} has no tokens")]
    EmptyDocument(String),

    #[error("empty term {0:?}")]
    EmptyTerm(String),

    #[error("empty triple set {0:?}")]
    EmptySet(String),

    #[error("numeric arity mismatch for predicate {predicate:?}: {left} vs {right}")]
    ArityMismatch {
        predicate: String,
        left: usize,
        right: usize,
    },

    #[error("expected {expected} object for predicate {predicate:?}")]
    ObjectKind {
        predicate: String,
        expected: &'static str,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("backend {policy} does not match the loaded {model} model")]
    BackendMismatch {
        policy: &'static str,
        model: &'static str,
    },

    #[error("unknown concept {0:?}")]
    UnknownConcept(String),

    #[error("adding {child:?} is-a {parent:?} would create a cycle")]
    CyclicTaxonomy { child: String, parent: String },

    #[error("a similarity matrix needs at least 2 triple sets, got {0}")]
    TooFewSets(usize),

    #[error("duplicate item label {0:?}")]
    DuplicateLabel(String),

    #[error("no listing files in {}", .0.display())]
    EmptyCatalog(PathBuf),

    #[error("top-k must be at least 1")]
    ZeroTopK,

    #[error("invalid interaction event: {0}")]
    InvalidEvent(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// The innermost error, skipping file-context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}
