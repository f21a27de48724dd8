use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("at most {max} blocking features are supported, got {got}")]
    TooManyFeatures { got: usize, max: usize },

    #[error("measure `{0}` cannot be used here")]
    WrongMeasureKind(&'static str),

    #[error("non-finite numeric input")]
    NonFinite,

    #[error("single-class training set")]
    SingleClass,

    #[error("feature layout mismatch: expected {expected} columns, found {found}")]
    LayoutMismatch { expected: usize, found: usize },

    #[error("stratum `{label}` has {size} member(s); at least 2 are required")]
    StratumTooSmall { label: bool, size: usize },

    #[error("self-loop on record {0}")]
    SelfLoop(u64),

    #[error("edge ({0}, {1}) listed twice with different weights")]
    ConflictingEdge(u64, u64),

    #[error("edge ({a}, {b}) has weight {weight}; weights must lie in (0, 1]")]
    InvalidWeight { a: u64, b: u64, weight: f64 },

    #[error("record {0} belongs to more than one cluster")]
    OverlappingClusters(u64),

    #[error("pair ({0}, {1}) is not in canonical order")]
    NonCanonicalPair(u64, u64),
}
