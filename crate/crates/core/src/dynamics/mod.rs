//! Composite and battery-only master-equation dynamics.

mod effective;
mod generator;
mod propagate;
mod state;
mod trajectory;

pub use effective::{effective_battery_generator, effective_operators, EffectiveOperators};
pub(crate) use effective::subspace_denominator;
pub use generator::{lindblad_rhs, LindbladGenerator, PopulationRates};
pub use propagate::{propagate, propagate_composite, uniform_grid, CompositeRun, StateRecord, StateSeries};
pub use state::DensityMatrix;
pub use trajectory::Trajectory;
