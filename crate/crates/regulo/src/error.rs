use std::path::PathBuf;

/// Error type shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters k = {k}, m = {m}: need k >= 2 and m >= 0")]
    InvalidParams { k: i64, m: i64 },

    #[error("k = {k} is outside the supported range for this operation: {reason}")]
    UnsupportedK { k: i64, reason: String },

    #[error("memory ceiling exceeded: need about {needed} bytes, limit is {limit}")]
    MemoryCeiling { needed: u64, limit: u64 },

    #[error("oracle cap exceeded: {0}")]
    OracleCap(String),

    #[error("enumeration produced more than {cap} partitions; use count instead")]
    OutputCap { cap: usize },

    #[error("polynomial is not symmetric: c[{n}] != c[N - {n}]")]
    NotSymmetric { n: u64 },

    #[error("window [{lo}, {hi}] out of range 1..={degree}")]
    WindowOutOfRange { lo: u64, hi: u64, degree: u64 },

    #[error("recurrence guard: 2^(k-1) terms is too many for k = {k} (max 16)")]
    RecurrenceGuard { k: i64 },

    #[error("corrupt checkpoint {path}: {reason}")]
    CorruptCheckpoint { path: PathBuf, reason: String },

    #[error("checkpoint {path} has format version {found}, this build reads version {expected}")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },

    #[error("resolution guard: {0}")]
    ResolutionGuard(String),

    #[error("quadrature did not converge: error estimate {error_estimate:e} above tolerance {tolerance:e} after {evaluations} evaluations")]
    QuadratureDidNotConverge {
        error_estimate: f64,
        tolerance: f64,
        evaluations: u64,
    },

    #[error("sample out of domain: {0}")]
    SampleOutOfDomain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
