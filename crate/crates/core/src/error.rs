use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("division by zero while {0}")]
    DivisionByZero(String),
    #[error("homotopy integrand is singular at the basepoint: {0}")]
    HomotopySingular(String),
    #[error("not an exact derivative: {0}")]
    NotExactDerivative(String),
    #[error("unsupported constraint shape: {0}")]
    UnsupportedConstraintShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("flux reconstruction failed: {0}")]
    FluxReconstructionFailed(String),
    #[error("order {requested} exceeds the cap {cap}")]
    OrderTooHigh { requested: u32, cap: u32 },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
