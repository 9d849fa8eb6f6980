use thiserror::Error;

/// Errors produced anywhere in the simulation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("step size underflow at t = {time:.6e} (h = {step:.3e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("integration produced a non-finite state at t = {time:.6e}")]
    IntegrationDiverged { time: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resonant subspace n = {n}: |Δ̃δ̃ − g²A_n²| = {magnitude:.3e} is numerically zero")]
    Resonance { n: usize, magnitude: f64 },

    #[error("perturbative series diverges: convergence ratio {ratio:.4} is not below {limit}")]
    SeriesDivergence { ratio: f64, limit: f64 },

    #[error("dense superoperator needs dimension ≤ {cap}, got {dim}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("ergotropy never reached {threshold:.6} (final value {last:.6})")]
    ThresholdNotReached { threshold: f64, last: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
