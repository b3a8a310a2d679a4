//! Error type shared by all toolkit modules.

use std::fmt;

/// Which namespace an identifier lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdKind {
    Vertex,
    Edge,
}

impl fmt::Display for IdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdKind::Vertex => write!(f, "vertex"),
            IdKind::Edge => write!(f, "edge"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed graph JSON: {0}")]
    MalformedJson(String),

    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: IdKind, id: String },

    #[error("edge {edge:?} references missing vertex {vertex:?}")]
    DanglingEndpoint { edge: String, vertex: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("unknown {kind} id {id:?}")]
    UnknownId { kind: IdKind, id: String },

    #[error("a cycle has an entry (edge {witness:?})")]
    EntryPresent { witness: String },

    #[error("decomposition is trivial: {0}")]
    TrivialDecomposition(String),

    #[error("inconsistent decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("paths from {vertex:?} are unbounded (a cycle is reachable)")]
    InfinitePathCount { vertex: String },

    #[error("path count from {vertex:?} overflows u64")]
    PathCountOverflow { vertex: String },

    #[error("graph has a cycle")]
    CyclePresent,

    #[error("|z| = {0} is not 1 within tolerance")]
    NotUnitModulus(f64),

    #[error("representations are over different graphs")]
    GraphMismatch,

    #[error("empty representation family")]
    EmptyFamily,

    #[error("{got} distinct evaluation points, need at least {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("graph has no cycle entries")]
    NoEntries,

    #[error("factor layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("certificate digest {certified} does not match graph digest {actual}")]
    DigestMismatch { certified: String, actual: String },

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("malformed path: {0}")]
    MalformedPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;
