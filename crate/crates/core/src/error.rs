use thiserror::Error;

/// Errors raised by measure constructions, kernels, the LP engine and the
/// order checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("measure has zero mass")]
    ZeroMass,

    #[error("measure is empty")]
    EmptyMeasure,

    /// Construction not defined for a point mass at the origin.
    #[error("measure is concentrated at the origin")]
    ConcentratedAtOrigin,

    #[error("atom {index} has last coordinate {value} outside the open upper half space")]
    OutsideHalfSpace { index: usize, value: f64 },

    #[error("kernel and measure are misaligned: {0}")]
    Misaligned(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The source has no mass but the target has mass with zero first
    /// moment: the order holds, yet no transporting kernel exists.
    #[error("source measure has no mass, so no kernel can reach a target with positive mass")]
    ZeroSource,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program is infeasible")]
    Infeasible,

    /// A witness failed its post-solve residual check. Usually means the
    /// tolerances are too tight for the data.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
