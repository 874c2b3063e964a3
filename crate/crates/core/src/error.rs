//! Error types for the engine, grouped by subsystem.

use thiserror::Error;

use crate::summary::PathId;

/// Errors raised while parsing XML input or assigning structural IDs.
#[derive(Debug, Error)]
pub enum XmlError {
    #[error("malformed XML at byte {offset}: {message}")]
    MalformedXml { offset: usize, message: String },
    #[error("document contains no root element")]
    EmptyDocument,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl XmlError {
    pub fn malformed(offset: usize, message: impl Into<String>) -> Self {
        XmlError::MalformedXml {
            offset,
            message: message.into(),
        }
    }
}

/// Errors raised by summary operations and summary (de)serialization.
#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("path {ancestor} is not an ancestor-or-self of path {descendant}")]
    NotAncestor {
        ancestor: PathId,
        descendant: PathId,
    },
    #[error("bad magic bytes; not a serialized path summary")]
    BadMagic,
    #[error("unsupported summary format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated summary input")]
    TruncatedInput,
    #[error("malformed summary serialization: {0}")]
    Malformed(String),
    #[error("document has no element or attribute nodes")]
    EmptyDocument,
    #[error(transparent)]
    Xml(#[from] XmlError),
}

/// Errors raised by the path-partitioned store.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("event path is absent from the summary: {0}")]
    SummaryMismatch(String),
    #[error("unknown path {0}")]
    UnknownPath(PathId),
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error("store format version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Summary(#[from] SummaryError),
}

impl From<XmlError> for StoreError {
    fn from(e: XmlError) -> Self {
        StoreError::Summary(SummaryError::Xml(e))
    }
}

/// Errors raised while parsing query patterns.
#[derive(Debug, Error)]
pub enum PatternError {
    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("pattern invariant violated: {0}")]
    InvariantViolation(String),
}

impl PatternError {
    pub fn syntax(position: usize, message: impl Into<String>) -> Self {
        PatternError::SyntaxError {
            position,
            message: message.into(),
        }
    }
}

/// Errors raised during relevant-path computation.
#[derive(Debug, Error)]
pub enum RelPathError {
    #[error("tuple expansion exceeds cap of {cap}")]
    TupleExplosion { cap: u64 },
}

/// Errors raised by physical operators and the planner.
#[derive(Debug, Error)]
pub enum ExecError {
    #[error("operator input is not sorted on its ordering column")]
    UnsortedInput,
    #[error("value column missing from operator input")]
    MissingColumn,
    #[error("pattern is unsatisfiable over this store")]
    Unsatisfiable,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
}

/// Errors raised during XML reconstruction.
#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("materialization exceeds the configured cap of {cap} rows")]
    OutOfBudget { cap: usize },
    #[error("root path set is not an antichain: {0} is an ancestor of {1}")]
    NotAntichain(PathId, PathId),
    #[error("corrupt store: {0}")]
    CorruptStore(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Errors raised by the synthetic document generator.
#[derive(Debug, Error)]
pub enum GenError {
    #[error("generation spec would produce about {estimate} nodes (cap {cap})")]
    SpecTooLarge { estimate: u64, cap: u64 },
}

/// Any engine error; convenient for callers that mix subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Xml(#[from] XmlError),
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    RelPath(#[from] RelPathError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
