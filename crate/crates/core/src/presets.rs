//! Reference parameter set: `γ_hg = 10γ_eg = 0.1E_B` and `Δ = 10δ = 0.1E_B`,
//! with the drive given as a fraction of `γ_hg`.

use crate::error::Result;
use crate::model::{ChargerParams, DecayRates};

pub const GAMMA_HG: f64 = 0.1;
pub const GAMMA_EG: f64 = 0.01;
pub const DETUNING_H: f64 = 0.1;
pub const DETUNING_E: f64 = 0.01;

/// Reference charger at zero coupling. With `leakage` the `|h⟩ → |e⟩` rate
/// equals `γ_eg`, otherwise it is zero. All values scale with `energy_quantum`.
pub fn reference_charger(energy_quantum: f64, drive_over_gamma_hg: f64, leakage: bool) -> Result<ChargerParams> {
    let e = energy_quantum;
    let rates = DecayRates { hg: GAMMA_HG * e, eg: GAMMA_EG * e, he: if leakage { GAMMA_EG * e } else { 0.0 } };
    ChargerParams::new(DETUNING_H * e, DETUNING_E * e, drive_over_gamma_hg * GAMMA_HG * e, rates, 0.0)
}
