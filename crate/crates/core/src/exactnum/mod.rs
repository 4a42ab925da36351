//! Exact rational scalars, rational-endpoint intervals, certified `exp`, and
//! determinants over both.

mod det;
mod expo;
mod interval;
mod rational;

pub use det::{exact_det, interval_det, DetConfig};
pub use expo::{exp_enclosure, MAX_ARGUMENT};
pub use interval::IntervalValue;
pub use rational::{rat, ArithOp, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor interval contains zero")]
    DivisorContainsZero,
    #[error("malformed rational {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("interval endpoints out of order: lo={lo} > hi={hi}")]
    InvertedInterval { lo: String, hi: String },
    #[error("tolerance must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("exp argument {0} is too large")]
    ArgumentTooLarge(String),
    #[error("matrix is not square ({rows} rows, a row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {dim} exceeds the configured maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("every pivot candidate contains zero at elimination step {step}")]
    Indeterminate { step: usize },
}
