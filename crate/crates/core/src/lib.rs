//! Simulation of a quantum battery charged through a driven, dissipative
//! three-level charger.
//!
//! The charger (levels `g`, `h`, `e`) is driven on `g ↔ h` and exchanges
//! excitations with the battery on `h ↔ e`; decay `e → g` then leaves the
//! battery one level higher. The crate provides the composite master
//! equation, the battery-only effective generator obtained by eliminating
//! the charger, ergotropy observables and coupling protocols.
//!
//! ```
//! use qtbattery::{presets, protocol, BatteryModel};
//!
//! let battery = BatteryModel::uniform_ladder(50, 1.0)?;
//! let charger = presets::reference_charger(1.0, 0.05, false)?;
//! let g = protocol::optimal_coupling(&battery, &charger, 0)?;
//! let rate = protocol::gamma_eff(&battery, &charger.with_coupling(g)?, 0)?;
//! assert!((rate - 2.5e-4).abs() < 1e-12);
//! # Ok::<(), qtbattery::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod perturbation;
pub mod presets;
pub mod protocol;
pub mod validate;

pub use dynamics::{DensityMatrix, LindbladGenerator, StateRecord, StateSeries, Trajectory};
pub use error::{Error, Result};
pub use model::{BatteryKind, BatteryModel, ChargerParams, DecayRates};
pub use numerics::{ComplexMatrix, Tolerances, C64};
pub use observables::PassiveState;
pub use protocol::{ChargePlan, ChargeRun, Engine, QuenchSchedule, SaturationReport};
