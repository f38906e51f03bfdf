use thiserror::Error;

use crate::lp_space::Field;

/// Errors raised by the numindex operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent p must satisfy 1 < p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("a space needs at least one atom")]
    EmptySpace,

    #[error("weight {index} must be finite and > 0, got {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: Field, found: Field },

    #[error("index {index} out of range for a space with {m} atoms")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("vector must have unit norm, got {norm}")]
    NotUnit { norm: f64 },

    #[error("coordinate {index} = {magnitude:e} lies inside the nonsmooth guard")]
    GuardViolation { index: usize, magnitude: f64 },

    #[error("dimension {m} too large for exhaustive enumeration (max {max})")]
    TooLarge { m: usize, max: usize },

    #[error("lambda must be >= -1, got {0}")]
    InvalidLambda(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
