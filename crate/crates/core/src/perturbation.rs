//! Per-subspace effective operators from resolvents, the golden-rule series
//! behind them, the vectorized generator and the `|h⟩ → |e⟩` leakage
//! diagnostics.
//!
//! Subspace `n` couples the ground state `|gn⟩` through the drive to the
//! excited pair `{|hn⟩, |e(n+1)⟩}`; the uppermost subspace has only `|hN⟩`.

use crate::dynamics::{subspace_denominator, LindbladGenerator};
use crate::error::{Error, Result};
use crate::model::{BatteryModel, ChargerParams};
use crate::numerics::matrix::{I, ZERO};
use crate::numerics::{kron, solve_linear, ComplexMatrix, C64};

/// Largest dimension accepted by [`vectorized_generator`].
pub const VECTORIZED_DIM_CAP: usize = 64;
/// Series checks refuse convergence ratios at or above this value.
pub const SERIES_RATIO_LIMIT: f64 = 0.95;
/// Highest order a series check will sum.
pub const SERIES_MAX_ORDER: usize = 200;

/// The excited manifold of one subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSystem {
    pub n: usize,
    /// `H̃_n` over `{|hn⟩, |e(n+1)⟩}`, or `[Δ̃]` for the top level.
    pub excited_hamiltonian: ComplexMatrix,
    /// Components of `V_{+,n}|gn⟩`.
    pub drive_vector: Vec<C64>,
    pub jump_hg: Vec<C64>,
    pub jump_eg: Vec<C64>,
    pub jump_he: Vec<C64>,
}

impl SubspaceSystem {
    pub fn new(b: &BatteryModel, c: &ChargerParams, n: usize) -> Result<Self> {
        if n >= b.dim() {
            return Err(Error::InvalidParameter { name: "n", reason: format!("subspace {n} outside 0..{}", b.dim()) });
        }
        let dh = c.complex_detuning_h();
        let omega = C64::new(c.drive(), 0.0);
        let r = c.rates();
        let (hg, eg, he) = (C64::new(r.hg.sqrt(), 0.0), C64::new(r.eg.sqrt(), 0.0), C64::new(r.he.sqrt(), 0.0));
        if n == b.top_level() {
            return Ok(Self {
                n,
                excited_hamiltonian: ComplexMatrix::from_diag(&[dh]),
                drive_vector: vec![omega],
                jump_hg: vec![hg],
                jump_eg: vec![ZERO],
                jump_he: vec![he],
            });
        }
        let ga = C64::new(c.coupling() * b.ladder_coeff(n), 0.0);
        let mut h = ComplexMatrix::from_diag(&[dh, c.complex_detuning_e()]);
        h[(0, 1)] = ga;
        h[(1, 0)] = ga;
        Ok(Self {
            n,
            excited_hamiltonian: h,
            drive_vector: vec![omega, ZERO],
            jump_hg: vec![hg, ZERO],
            jump_eg: vec![ZERO, eg],
            jump_he: vec![he, ZERO],
        })
    }

    pub fn dim(&self) -> usize {
        self.excited_hamiltonian.rows()
    }

    /// `|g²A_n²/(Δ̃δ̃)|`, zero for the top level.
    pub fn convergence_ratio(&self) -> f64 {
        if self.dim() == 1 {
            return 0.0;
        }
        let h = &self.excited_hamiltonian;
        (h[(0, 1)] * h[(1, 0)] / (h[(0, 0)] * h[(1, 1)])).norm()
    }
}

/// Effective coefficients of one subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceOperators {
    /// `−V†H̃⁻¹V`, whose real part is the effective energy shift.
    pub complex_hamiltonian: C64,
    pub hamiltonian: f64,
    pub l_hg: C64,
    pub l_eg: C64,
    /// Leakage amplitude `|gn⟩ → |en⟩` through `|h⟩ → |e⟩` decay.
    pub l_he: C64,
}

fn dot(row: &[C64], x: &[C64]) -> C64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Resolvent evaluation `−V†H̃⁻¹V` and `L·H̃⁻¹V`.
pub fn effective_operators_subspace(s: &SubspaceSystem) -> Result<SubspaceOperators> {
    let h = &s.excited_hamiltonian;
    let det = if s.dim() == 1 { h[(0, 0)] } else { h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)] };
    let scale = if s.dim() == 1 { 1.0 } else { (h[(0, 0)] * h[(1, 1)]).norm() };
    if det.norm() == 0.0 || det.norm() < crate::numerics::tolerances::RESONANCE_TOL * scale {
        return Err(Error::Resonance { n: s.n, magnitude: det.norm() });
    }
    let x = solve_linear(h, &s.drive_vector).map_err(|e| match e {
        Error::Singular { .. } => Error::Resonance { n: s.n, magnitude: det.norm() },
        other => other,
    })?;
    let complex_hamiltonian = -s.drive_vector.iter().zip(&x).map(|(v, x)| v.conj() * x).sum::<C64>();
    Ok(SubspaceOperators {
        complex_hamiltonian,
        hamiltonian: complex_hamiltonian.re,
        l_hg: dot(&s.jump_hg, &x),
        l_eg: dot(&s.jump_eg, &x),
        l_he: dot(&s.jump_he, &x),
    })
}

/// Closed-form coefficients for subspace `n`.
pub fn closed_form_subspace(b: &BatteryModel, c: &ChargerParams, n: usize) -> Result<SubspaceOperators> {
    let dh = c.complex_detuning_h();
    let de = c.complex_detuning_e();
    let omega = c.drive();
    let r = c.rates();
    if n == b.top_level() {
        let inv = dh.inv();
        return Ok(SubspaceOperators {
            complex_hamiltonian: -inv * omega * omega,
            hamiltonian: -omega * omega * inv.re,
            l_hg: inv * (r.hg.sqrt() * omega),
            l_eg: ZERO,
            l_he: inv * (r.he.sqrt() * omega),
        });
    }
    let a = b.ladder_coeff(n);
    let den = subspace_denominator(c, a, n)?;
    let x = de / den;
    Ok(SubspaceOperators {
        complex_hamiltonian: -x * omega * omega,
        hamiltonian: -omega * omega * x.re,
        l_hg: x * (r.hg.sqrt() * omega),
        l_eg: C64::new(r.eg.sqrt() * omega * c.coupling() * a, 0.0) / (-den),
        l_he: x * (r.he.sqrt() * omega),
    })
}

/// `Ω_eff^(l)`: sum over excited-state paths of length `l` starting on
/// `|hn⟩`, each hop weighted by the coupling over minus the energy of the
/// state it leaves. Odd orders end on `|hn⟩`, even orders on `|e(n+1)⟩`.
pub fn fgr_effective_coupling(s: &SubspaceSystem, l: usize) -> Result<C64> {
    if l == 0 {
        return Err(Error::InvalidParameter { name: "l", reason: "order must be at least 1".into() });
    }
    let target = if l % 2 == 1 { 0 } else { 1 };
    if target >= s.dim() {
        return Ok(ZERO);
    }
    fn walk(h: &ComplexMatrix, state: usize, hops_left: usize, target: usize, weight: C64) -> C64 {
        if hops_left == 0 {
            return if state == target { weight } else { ZERO };
        }
        let mut total = ZERO;
        for next in 0..h.rows() {
            let v = h[(next, state)];
            if next != state && v != ZERO {
                total += walk(h, next, hops_left - 1, target, weight * v / -h[(state, state)]);
            }
        }
        total
    }
    Ok(walk(&s.excited_hamiltonian, 0, l - 1, target, s.drive_vector[0]))
}

/// Outcome of summing the golden-rule series up to a maximum order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCheck {
    pub ratio: f64,
    pub max_order: usize,
    /// Running `L_hg` partial sums after each odd order.
    pub partial_hg: Vec<C64>,
    /// Running `L_eg` partial sums after each even order.
    pub partial_eg: Vec<C64>,
    pub closed_hg: C64,
    pub closed_eg: C64,
    /// `|partial − closed|` at the maximum order, over the leading term.
    pub residual_hg: f64,
    pub residual_eg: f64,
}

impl SeriesCheck {
    pub fn max_residual(&self) -> f64 {
        self.residual_hg.max(self.residual_eg)
    }
}

/// Sums `√γ_hg/Δ̃·ΣΩ_eff^(2k+1)` and `√γ_eg/δ̃·ΣΩ_eff^(2k+2)` over all
/// orders `≤ max_order` and compares with the resolvent coefficients.
pub fn fgr_series_check(s: &SubspaceSystem, max_order: usize) -> Result<SeriesCheck> {
    if max_order == 0 || max_order > SERIES_MAX_ORDER {
        return Err(Error::InvalidParameter { name: "l_max", reason: format!("must lie in 1..={SERIES_MAX_ORDER}, got {max_order}") });
    }
    let ratio = s.convergence_ratio();
    if ratio >= SERIES_RATIO_LIMIT {
        return Err(Error::SeriesDivergence { ratio, limit: SERIES_RATIO_LIMIT });
    }
    let closed = effective_operators_subspace(s)?;
    let h = &s.excited_hamiltonian;
    let pre_hg = s.jump_hg[0] / h[(0, 0)];
    let pre_eg = if s.dim() == 2 { s.jump_eg[1] / h[(1, 1)] } else { ZERO };

    let (mut sum_hg, mut sum_eg) = (ZERO, ZERO);
    let (mut partial_hg, mut partial_eg) = (Vec::new(), Vec::new());
    let (mut lead_hg, mut lead_eg) = (0.0, 0.0);
    for l in 1..=max_order {
        let term = fgr_effective_coupling(s, l)?;
        if l % 2 == 1 {
            sum_hg += pre_hg * term;
            partial_hg.push(sum_hg);
            if l == 1 {
                lead_hg = (pre_hg * term).norm();
            }
        } else {
            sum_eg += pre_eg * term;
            partial_eg.push(sum_eg);
            if l == 2 {
                lead_eg = (pre_eg * term).norm();
            }
        }
    }
    let rel = |sum: C64, closed: C64, lead: f64| {
        let diff = (sum - closed).norm();
        if lead > 0.0 {
            diff / lead
        } else {
            diff
        }
    };
    Ok(SeriesCheck {
        ratio,
        max_order,
        residual_hg: rel(sum_hg, closed.l_hg, lead_hg),
        residual_eg: rel(sum_eg, closed.l_eg, lead_eg),
        partial_hg,
        partial_eg,
        closed_hg: closed.l_hg,
        closed_eg: closed.l_eg,
    })
}

/// Column-stacked superoperator `𝐋` with `vec(ρ̇) = 𝐋·vec(ρ)`:
/// `−i(I⊗H − Hᵀ⊗I) + Σ_k [L̄_k⊗L_k − ½ I⊗L_k†L_k − ½ (L_k†L_k)ᵀ⊗I]`.
pub fn vectorized_generator(gen: &LindbladGenerator) -> Result<ComplexMatrix> {
    let d = gen.dim();
    if d > VECTORIZED_DIM_CAP {
        return Err(Error::DimensionCap { dim: d, cap: VECTORIZED_DIM_CAP });
    }
    let id = ComplexMatrix::identity(d);
    let h = gen.hamiltonian();
    let mut out = &kron(&id, h) - &kron(&h.transpose(), &id);
    out = out.scale(-I);
    for l in gen.jumps() {
        let ldl = &l.adjoint() * l;
        out = &out + &kron(&l.conj(), l);
        out.axpy(C64::new(-0.5, 0.0), &kron(&id, &ldl));
        out.axpy(C64::new(-0.5, 0.0), &kron(&ldl.transpose(), &id));
    }
    Ok(out)
}

/// Leakage diagnostics for subspace `n` (relative to the charging rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargingRatios {
    pub dephasing: f64,
    pub decay: f64,
}

/// Dephasing and decay induced by `|h⟩ → |e⟩` decay between subspaces
/// `n − 1` and `n`, from the inverse of `−iH̃*_{n−1}⊗I + I⊗iH̃_{n−1}`.
pub fn discharging_ratios(b: &BatteryModel, c: &ChargerParams, n: usize) -> Result<DischargingRatios> {
    if n == 0 || n + 1 >= b.dim() {
        return Err(Error::InvalidParameter { name: "n", reason: format!("needs 1 ≤ n ≤ {}, got {n}", b.dim().saturating_sub(2)) });
    }
    let r = c.rates();
    if r.he == 0.0 {
        return Ok(DischargingRatios { dephasing: 0.0, decay: 0.0 });
    }
    let a_n = b.ladder_coeff(n);
    if r.hg <= 0.0 || r.eg <= 0.0 || c.coupling() <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "rates",
            reason: "gamma_hg, gamma_eg and g must be positive for the leakage ratios".into(),
        });
    }
    let ht = SubspaceSystem::new(b, c, n - 1)?.excited_hamiltonian;
    let id = ComplexMatrix::identity(2);
    let k = &kron(&ht.conj(), &id).scale(-I) + &kron(&id, &ht).scale(I);
    let mut rhs = vec![ZERO; 4];
    rhs[3] = C64::new(1.0, 0.0);
    let x = solve_linear(&k, &rhs)?;
    let de = c.complex_detuning_e();
    let ga2 = (c.coupling() * a_n).powi(2);
    Ok(DischargingRatios {
        dephasing: r.eg * r.he / r.hg * x[3].norm(),
        decay: r.hg * r.he * de.norm_sqr() / (r.eg * ga2) * x[0].norm(),
    })
}
