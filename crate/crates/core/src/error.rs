use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} out of range; requires {requirement}")]
    ParamDomain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("length {len} is not a power of two")]
    NonPowerOfTwo { len: usize },

    #[error("d = {d} exceeds the small-instance cap of {cap}")]
    SmallInstanceCapExceeded { d: usize, cap: usize },

    #[error("sketches were built from different projections and cannot merge")]
    ProjectionMismatch,

    #[error("d = {d} too small for the block-Hadamard path; requires d > 6*c*ln(3*c/delta) = {threshold}")]
    HadamardDimension { d: usize, threshold: f64 },

    #[error("trials must be >= 1")]
    NoTrials,

    #[error("input must be a unit vector; got ||x||_2 = {norm}")]
    NotUnitNorm { norm: f64 },
}
