//! Crate-wide error type.

use thiserror::Error;

/// Everything the library can refuse to do, with enough context to print.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Text input violated a file-format grammar.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A presentation failed a structural rule (bad token, duplicate name, ...).
    #[error("invalid presentation: {0}")]
    Presentation(String),

    /// Operation needed two diagrams over the same presentation.
    #[error("presentations differ (content mismatch)")]
    PresentationMismatch,

    /// Concatenation interface words disagree.
    #[error("label mismatch: bottom word `{bottom}` does not equal top word `{top}`")]
    LabelMismatch { bottom: String, top: String },

    /// A permutation argument was not a bijection on the expected slots.
    #[error("not a permutation of 0..{expected}: {detail}")]
    BadPermutation { expected: usize, detail: String },

    /// A dipole occurrence no longer matches the diagram it is applied to.
    #[error("stale dipole occurrence: {0}")]
    StaleDipole(String),

    /// Operation requires a dipole-free diagram.
    #[error("diagram is not reduced")]
    NotReduced,

    /// Operation requires a valid diagram and the given one is not.
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    /// A dipole insertion request did not fit the diagram.
    #[error("cannot insert dipole: {0}")]
    BadInsertion(String),

    /// The presentation must be tree-like for tree/space operations.
    #[error("presentation is not tree-like: {0}")]
    NotTreeLike(String),

    /// An address does not name a vertex of the tree.
    #[error("address {address} is not realizable: {detail}")]
    UnrealizableAddress { address: String, detail: String },

    /// A point prefix flag disagrees with the vertex it names.
    #[error("terminal flag mismatch at {address}: {detail}")]
    TerminalMismatch { address: String, detail: String },

    /// Two balls were comparable where an antichain was required.
    #[error("balls {outer} and {inner} are nested")]
    NestedBalls { outer: String, inner: String },

    /// An address set is not a partition of the end space.
    #[error("not a partition: {0}")]
    NotAPartition(String),

    /// Point prefixes too shallow to separate or to evaluate.
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    /// A defining triple failed validation.
    #[error("invalid defining triple: {0}")]
    InvalidTriple(String),

    /// Evaluation point does not reach inside a single domain ball.
    #[error("prefix too shallow: {0}")]
    TooShallow(String),

    /// Diagram cannot be read as a defining triple.
    #[error("diagram does not define a similarity element: {0}")]
    NotATripleDiagram(String),

    /// Catalog lookup failed or parameters out of range.
    #[error("unknown or malformed builtin: {0}")]
    BadBuiltin(String),

    /// A Houghton end-translation spec failed validation.
    #[error("invalid end-translation spec: {0}")]
    BadTranslationSpec(String),

    /// Diagram is not over the expected catalog presentation.
    #[error("wrong presentation: expected {expected}")]
    WrongPresentation { expected: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
