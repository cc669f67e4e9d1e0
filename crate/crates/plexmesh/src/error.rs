//! Error type shared by every module of the crate.
//!
//! Variants mirror the failure classes of the public operations: structural
//! defects in the covering relation are topology errors, violations of the
//! contiguous-numbering or section contracts are layout errors, and so on.
//! Each variant carries a human-readable message naming the offending point,
//! file construct, or argument.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum MeshError {
    /// A structural defect in the covering relation (cycle, non-manifold
    /// facet, non-simplex cell closure).
    #[error("topology error: {0}")]
    Topology(String),

    /// A violation of the contiguous-numbering or section layout contract.
    #[error("layout error: {0}")]
    Layout(String),

    /// A point, depth, or height outside the valid range.
    #[error("range error: {0}")]
    Range(String),

    /// An invalid argument value.
    #[error("argument error: {0}")]
    Argument(String),

    /// Malformed or unsupported input data (e.g. an MSH construct outside
    /// the supported subset).
    #[error("format error: {0}")]
    Format(String),

    /// A cross-structure inconsistency: dangling references, mismatched
    /// sizes, or indices escaping their target array.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// An operation was invoked before its prerequisites were established
    /// (classes not marked, overlap missing, ...).
    #[error("precondition error: {0}")]
    Precondition(String),

    /// An operation had no single well-defined result (e.g. a replace
    /// reduction with several contributions to one slot).
    #[error("ambiguity error: {0}")]
    Ambiguity(String),

    /// An underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MeshError>;
