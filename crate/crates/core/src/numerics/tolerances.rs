//! Frozen numerical defaults. Everything here can be overridden per call.

/// Relative tolerance of the adaptive integrator.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Absolute tolerance of the adaptive integrator.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// Admitted asymmetry of a Hermitian input, relative to `max(1, ‖m‖)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Trace deviation admitted for a density matrix.
pub const STATE_TRACE_TOL: f64 = 1e-9;
/// Hermiticity defect admitted for a density matrix.
pub const STATE_HERMITIAN_TOL: f64 = 1e-9;
/// Most negative eigenvalue admitted for a density matrix.
pub const STATE_POSITIVITY_TOL: f64 = 1e-7;

/// Residual bound factor for linear solves: `‖Ax − b‖ ≤ c·(‖A‖‖x‖ + ‖b‖)`.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;
/// Condition estimates above this are rejected as singular.
pub const SOLVE_MAX_CONDITION: f64 = 1e12;

/// Relative closeness of `Δ̃δ̃ − g²A_n²` to zero treated as a resonance.
pub const RESONANCE_TOL: f64 = 1e-12;

/// Samples on the output grid when the caller does not choose.
pub const DEFAULT_GRID_POINTS: usize = 400;

/// Integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: DEFAULT_REL_TOL, abs: DEFAULT_ABS_TOL }
    }
}
