//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors produced while building models, loading data, or solving.
#[derive(Debug, Error)]
pub enum Error {
    /// A member connects a node to itself or has zero length.
    #[error("member {member} has zero length")]
    ZeroLengthMember { member: usize },

    /// Model geometry or indices are invalid.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The compatibility vectors do not span the free DOF space, so the
    /// reference stiffness is singular and no equilibrium analysis is possible.
    #[error("kinematically indeterminate model: compatibility vectors do not span the free DOFs")]
    KinematicallyIndeterminate,

    /// A dataset file (or truss file) could not be parsed.
    #[error("parse error at {path}:{row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    /// The dataset has no points.
    #[error("dataset is empty")]
    EmptyDataset,

    /// No usable stress/strain ratios, or the resulting weighting is not positive.
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    /// A nearest-point query was made against an empty candidate set.
    #[error("nearest-point query over an empty allowed set")]
    EmptyAllowedSet,

    /// A synthetic-data curve specification could not be interpreted.
    #[error("invalid curve spec: {0}")]
    InvalidCurveSpec(String),

    /// The reference stiffness is not positive definite.
    #[error("reference stiffness is not positive definite")]
    NotPositiveDefinite,

    /// Exhaustive enumeration would exceed the configured limit.
    #[error("enumeration too large: {assignments} assignments exceed the limit of {limit}")]
    TooLarge { assignments: u128, limit: u128 },

    /// Internal: branching was requested on a node without free members.
    #[error("branch called on a node with no free member")]
    NoFreeMember,

    /// An assignment or state has the wrong shape for the model/dataset.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
