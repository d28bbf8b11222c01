use crate::numeric::{Mode, Rational};
use crate::series::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("moment order must be nonnegative, got {0}")]
    NegativeOrder(Rational),

    #[error("quotient of moment functions needs order {numerator} >= {denominator}")]
    QuotientOrder {
        numerator: Rational,
        denominator: Rational,
    },

    #[error("invalid tabulated moment function: {0}")]
    InvalidTable(String),

    #[error("tabulated moment function has {len} values, requested index {n}")]
    TableExhausted { n: usize, len: usize },

    #[error("{0} has no exact rational value")]
    NotExact(String),

    #[error("arithmetic mode mismatch: expected {expected:?}, found {found:?}")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} exceeds degree cap {cap}")]
    IndexOutOfCap { index: MultiIndex, cap: u32 },

    #[error("degree budget too small: need {needed}, have {available}")]
    DegreeBudget { needed: u32, available: u32 },

    #[error("time series too short: need at least {needed} coefficients, have {available}")]
    TimeOrder { needed: usize, available: usize },

    #[error("series is empty")]
    EmptySeries,

    #[error("term j={j}, alpha={alpha} has shift q={q} < 1")]
    NonPositiveShift { j: u32, alpha: MultiIndex, q: i64 },

    #[error("term j={j}, alpha={alpha} has an identically zero coefficient")]
    ZeroCoefficient { j: u32, alpha: MultiIndex },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
