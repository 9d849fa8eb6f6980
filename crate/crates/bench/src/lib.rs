//! Fixtures shared by the benchmarks.

use qtbattery::model::{composite_hamiltonian, jump_operators};
use qtbattery::observables::thermal_state;
use qtbattery::presets::reference_charger;
use qtbattery::protocol::optimal_coupling;
use qtbattery::{BatteryModel, ChargerParams, DensityMatrix, LindbladGenerator};

/// Uniform ladder of size `n` with the reference charger at the optimal
/// coupling of the lowest level.
pub fn uniform_setup(n: usize) -> (BatteryModel, ChargerParams) {
    let b = BatteryModel::uniform_ladder(n, 1.0).expect("valid size");
    let c = reference_charger(1.0, 0.05, true).expect("reference parameters");
    let g = optimal_coupling(&b, &c, 0).expect("nonresonant");
    (b, c.with_coupling(g).expect("valid coupling"))
}

/// Full charger-battery generator and a generic mixed composite state.
pub fn composite_fixture(n: usize) -> (LindbladGenerator, DensityMatrix) {
    let (b, c) = uniform_setup(n);
    let gen = LindbladGenerator::new(composite_hamiltonian(&b, &c), jump_operators(&b, &c)).expect("valid generator");
    let charger = DensityMatrix::from_populations(&[0.9, 0.07, 0.03]).expect("valid populations");
    let rho = DensityMatrix::product(&charger, &thermal_state(&b, 0.5).expect("valid beta"));
    (gen, rho)
}
