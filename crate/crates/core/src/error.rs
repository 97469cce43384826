use thiserror::Error;

use crate::quantmaps::CriticalWitness;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: n = {left} vs n = {right}")]
    Dimension { left: usize, right: usize },

    #[error("odd index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{0} is not parity-homogeneous")]
    MixedParity(&'static str),

    #[error("weight mismatch: {0}")]
    WeightMismatch(String),

    #[error("flavor mismatch: expected {expected}")]
    Flavor { expected: &'static str },

    #[error("the zero operator has no order")]
    ZeroOperator,

    #[error("order precondition violated: {0}")]
    Order(String),

    #[error("symbol is not bigrade-homogeneous")]
    NonHomogeneous,

    #[error("superdimension m = 1 - n = -1: the density isomorphism is undefined for n = 2")]
    SuperDimension,

    #[error("n must be at least 1")]
    ZeroDimension,

    #[error("critical value of delta: {0}")]
    Critical(CriticalWitness),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
