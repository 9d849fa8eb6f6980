//! Stored energy, passive states, ergotropy and thermal states of a battery.

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::BatteryModel;
use crate::numerics::hermitian_eigenvalues;

/// Populations of the passive state, indexed by battery level.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveState {
    pub populations: Vec<f64>,
}

fn check_dim(rho: &DensityMatrix, b: &BatteryModel) -> Result<()> {
    if rho.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: format!("battery dimension {}", b.dim()), found: rho.dim().to_string() });
    }
    Ok(())
}

/// `Σ E_n p_n`
pub fn energy_of_populations(p: &[f64], b: &BatteryModel) -> f64 {
    p.iter().zip(b.level_energies()).map(|(p, e)| p * e).sum()
}

/// `Tr[H_B ρ]`
pub fn energy(rho: &DensityMatrix, b: &BatteryModel) -> Result<f64> {
    check_dim(rho, b)?;
    Ok(energy_of_populations(&rho.populations(), b))
}

/// `Tr[H_B ρ] − Tr[H_B ρ₀]`
pub fn stored_energy(rho: &DensityMatrix, rho0: &DensityMatrix, b: &BatteryModel) -> Result<f64> {
    Ok(energy(rho, b)? - energy(rho0, b)?)
}

/// Levels ordered by ascending energy (stable for degenerate levels).
fn levels_by_energy(b: &BatteryModel) -> Vec<usize> {
    let e = b.level_energies();
    let mut order: Vec<usize> = (0..b.dim()).collect();
    order.sort_by(|&i, &j| e[i].total_cmp(&e[j]));
    order
}

/// Assigns a spectrum, largest value first, to levels in ascending energy.
pub fn passive_from_spectrum(spectrum: &[f64], b: &BatteryModel) -> PassiveState {
    let mut desc = spectrum.to_vec();
    desc.sort_by(|x, y| y.total_cmp(x));
    let mut populations = vec![0.0; b.dim()];
    for (&level, &lambda) in levels_by_energy(b).iter().zip(&desc) {
        populations[level] = lambda;
    }
    PassiveState { populations }
}

fn spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.is_diagonal() {
        Ok(rho.populations())
    } else {
        hermitian_eigenvalues(rho.matrix())
    }
}

pub fn passive_state(rho: &DensityMatrix, b: &BatteryModel) -> Result<PassiveState> {
    check_dim(rho, b)?;
    Ok(passive_from_spectrum(&spectrum(rho)?, b))
}

/// Ergotropy of a diagonal state given by its populations.
pub fn ergotropy_of_populations(p: &[f64], b: &BatteryModel) -> f64 {
    let passive = passive_from_spectrum(p, b);
    (energy_of_populations(p, b) - energy_of_populations(&passive.populations, b)).max(0.0)
}

/// `Tr[H_B ρ] − Tr[H_B σ(ρ)]` with `σ` the passive state.
///
/// Rounding can push the difference of two nearly equal energies slightly
/// below zero; such values are clamped to 0.
pub fn ergotropy(rho: &DensityMatrix, b: &BatteryModel) -> Result<f64> {
    check_dim(rho, b)?;
    let passive = passive_from_spectrum(&spectrum(rho)?, b);
    Ok((energy_of_populations(&rho.populations(), b) - energy_of_populations(&passive.populations, b)).max(0.0))
}

/// Gibbs state `e^{−βH_B}/Z`. `beta = f64::INFINITY` gives the ground level
/// and `beta = 0` the maximally mixed state.
pub fn thermal_state(b: &BatteryModel, beta: f64) -> Result<DensityMatrix> {
    DensityMatrix::from_populations(&thermal_populations(b, beta)?)
}

pub fn thermal_populations(b: &BatteryModel, beta: f64) -> Result<Vec<f64>> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter { name: "beta", reason: format!("must be nonnegative or infinite, got {beta}") });
    }
    let e = b.level_energies();
    let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = if beta.is_infinite() {
        e.iter().map(|&x| if x == e_min { 1.0 } else { 0.0 }).collect()
    } else {
        e.iter().map(|&x| (-beta * (x - e_min)).exp()).collect()
    };
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Level with the largest population; ties go to the higher level.
pub fn most_populated_of(p: &[f64]) -> usize {
    let mut best = 0;
    for (n, &x) in p.iter().enumerate() {
        if x >= p[best] {
            best = n;
        }
    }
    best
}

pub fn most_populated_level(rho: &DensityMatrix) -> usize {
    most_populated_of(&rho.populations())
}
