use crate::error::{Error, Result};
use crate::model::{BatteryModel, ChargerParams};
use crate::numerics::tolerances::RESONANCE_TOL;
use crate::numerics::{ComplexMatrix, C64};

use super::generator::LindbladGenerator;

/// Closed-form coefficients of the battery-only generator, one entry per
/// level `n` (the raising coefficient of the top level is absent).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveOperators {
    /// Diagonal of the effective Hamiltonian.
    pub hamiltonian: Vec<f64>,
    /// Diagonal of the dephasing jump inherited from `|h⟩ → |g⟩` decay.
    pub dephasing: Vec<C64>,
    /// Subdiagonal `⟨n+1|L|n⟩` of the raising jump inherited from `|e⟩ → |g⟩` decay.
    pub raising: Vec<C64>,
}

impl EffectiveOperators {
    /// `|raising_n|²`, the upward transition rate out of level `n`.
    pub fn rate(&self, n: usize) -> f64 {
        self.raising.get(n).map_or(0.0, |z| z.norm_sqr())
    }
}

/// `Δ̃δ̃ − g²A_n²`, rejecting numerically zero values.
pub(crate) fn subspace_denominator(c: &ChargerParams, a_n: f64, n: usize) -> Result<C64> {
    let dd = c.detuning_product();
    let ga = c.coupling() * a_n;
    let den = dd - ga * ga;
    if den.norm() < RESONANCE_TOL * dd.norm() || den.norm() == 0.0 {
        return Err(Error::Resonance { n, magnitude: den.norm() });
    }
    Ok(den)
}

/// Coefficients of the effective Hamiltonian and jumps for every level.
pub fn effective_operators(b: &BatteryModel, c: &ChargerParams) -> Result<EffectiveOperators> {
    let d = b.dim();
    let dh = c.complex_detuning_h();
    let de = c.complex_detuning_e();
    let omega = c.drive();
    let rates = c.rates();
    let (shg, seg) = (rates.hg.sqrt(), rates.eg.sqrt());

    let mut hamiltonian = Vec::with_capacity(d);
    let mut dephasing = Vec::with_capacity(d);
    let mut raising = Vec::with_capacity(d - 1);
    for n in 0..d - 1 {
        let a = b.ladder_coeff(n);
        let den = subspace_denominator(c, a, n)?;
        let x = de / den;
        hamiltonian.push(-omega * omega * x.re);
        dephasing.push(x * (shg * omega));
        raising.push(C64::new(-seg * omega * c.coupling() * a, 0.0) / den);
    }
    let top = d - 1;
    if dh.norm() == 0.0 {
        return Err(Error::Resonance { n: top, magnitude: 0.0 });
    }
    let inv = dh.inv();
    hamiltonian.push(-omega * omega * inv.re);
    dephasing.push(inv * (shg * omega));
    Ok(EffectiveOperators { hamiltonian, dephasing, raising })
}

/// Battery-only generator: diagonal Hamiltonian, diagonal dephasing jump
/// and a raising jump. Jumps that vanish identically are left out.
pub fn effective_battery_generator(b: &BatteryModel, c: &ChargerParams) -> Result<LindbladGenerator> {
    let ops = effective_operators(b, c)?;
    generator_from_operators(&ops)
}

pub(crate) fn generator_from_operators(ops: &EffectiveOperators) -> Result<LindbladGenerator> {
    let d = ops.hamiltonian.len();
    let h = ComplexMatrix::from_real_diag(&ops.hamiltonian);
    let mut jumps = Vec::with_capacity(2);
    if ops.dephasing.iter().any(|z| z.norm() > 0.0) {
        jumps.push(ComplexMatrix::from_diag(&ops.dephasing));
    }
    if ops.raising.iter().any(|z| z.norm() > 0.0) {
        let mut l = ComplexMatrix::zeros(d, d);
        for (n, &z) in ops.raising.iter().enumerate() {
            l[(n + 1, n)] = z;
        }
        jumps.push(l);
    }
    LindbladGenerator::new(h, jumps)
}
