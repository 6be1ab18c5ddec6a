//! Crate-wide error type. Variant names mirror the failure classes surfaced
//! at module boundaries so callers can match on them directly.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value outside the fixed-point range: {0}")]
    RangeOverflow(String),
    #[error("field bytes are not a canonical encoding")]
    NonCanonicalFieldBytes,
    #[error("constraint system is finalized; no further constraints accepted")]
    Finalized,
    #[error("constraint system not finalized yet")]
    NotFinalized,
    #[error("no satisfying assignment: {0}")]
    Unsatisfiable(String),
    #[error("witness length {got} does not match variable count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("bit-matrix kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },
    #[error("mask round skew: previous round {prev}, current round {cur}")]
    RoundSkew { prev: u32, cur: u32 },
    #[error("label entries must be 0 or 1")]
    NonBinaryLabel,
    #[error("owner row ranges overlap or fail to cover the dataset: {0}")]
    OverlappingRows(String),
    #[error("unknown owner: {0}")]
    UnknownOwner(String),
    #[error("no samples survive the mask (effective count is zero)")]
    EmptyEffectiveSet,
    #[error("bad circuit shape: {0}")]
    BadShape(String),
    #[error("malformed VRF key")]
    MalformedKey,
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("batch size must satisfy 1 <= size <= dataset size")]
    BadBatchSize,
    #[error("not enough candidate samples to assemble a forging minibatch")]
    NoCandidates,
    #[error("no same-class neighbor available for replacement")]
    NoSameClassNeighbor,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("commitment requires a nonempty value vector")]
    Empty,
    #[error("leaf index {index} out of range for {leaves} leaves")]
    IndexOutOfRange { index: usize, leaves: usize },
    #[error("owner signature missing: {0}")]
    MissingSignature(String),
    #[error("owner signature invalid: {0}")]
    BadSignature(String),
    #[error("schedule failed internal verification: {0}")]
    ScheduleVerifyFailed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
}

pub type Result<T> = std::result::Result<T, Error>;
