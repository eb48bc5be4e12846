use thiserror::Error;

/// Errors raised by surface evaluation, identity checks, quadrature and export.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grain angle {0} outside the open interval (0, pi)")]
    InvalidAngle(f64),

    #[error("point ({x}, {y}) lies on a defect core")]
    CorePoint { x: f64, y: f64 },

    #[error("cotangent pole: b = {0} is an integer multiple of pi")]
    PoleAtB(f64),

    #[error("invalid point pair: {0}")]
    InvalidPair(String),

    #[error("sin(y + ix) vanishes at y = {y}, x = {x}")]
    LogBranchPoint { y: f64, x: f64 },

    #[error("derivatives unavailable at ({x}, {y})")]
    DerivativeUnavailable { x: f64, y: f64 },

    #[error("grid has no usable nodes")]
    EmptyGrid,

    #[error("non-finite energy integrand at ({x}, {y})")]
    NonFiniteEnergy { x: f64, y: f64 },

    #[error("bracket [{lo}, {hi}] does not enclose a minimum")]
    BadBracket { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
