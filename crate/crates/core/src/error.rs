use alloc::string::String;

use crate::model::Family;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("count defined only for restricted families (got {0})")]
    RestrictedOnly(Family),
    #[error("{op} is not defined for the {family} family")]
    UnsupportedFamily { op: &'static str, family: Family },
    #[error("invalid operator set: {0}")]
    InvalidOperatorSet(String),
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch in `{field}`: expected {expected}, found {found}")]
    ShapeMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("parameter overflow")]
    ParameterOverflow,
    #[error("invalid range: lo ({lo}) must be below hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("{n} visible units exceeds the enumeration bound of {limit}")]
    TooManyVisible { n: usize, limit: usize },
    #[error("{qubits} qubits exceeds the dense-oracle bound of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("eigendecomposition failed")]
    Eigen,
    #[error("target support unreachable at v = {0}")]
    UnreachableSupport(u64),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}
