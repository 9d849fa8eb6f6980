//! Dense complex linear algebra and time integration.

pub mod eigh;
pub mod linsolve;
pub mod matrix;
pub mod ode;
pub mod tolerances;

pub use eigh::{hermitian_eigenvalues, hermitian_eigh, HermitianEigenDecomposition};
pub use linsolve::{cholesky_succeeds, solve_linear};
pub use matrix::{kron, ComplexMatrix, C64};
pub use ode::{integrate_ode, integrate_ode_with, IntegrationStats, OdeState};
pub use tolerances::Tolerances;
