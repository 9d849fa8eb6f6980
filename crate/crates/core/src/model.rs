//! Battery prototypes, charger parameters and the composite-space operators
//! of the driven qutrit coupled to the battery, in the rotating frame.
//!
//! Composite basis ordering is qutrit-major: `index(i, n) = i·dim + n` with
//! qutrit levels ordered `(g, h, e)`.

use crate::error::{Error, Result};
use crate::numerics::{kron, ComplexMatrix, C64};

/// The three battery prototypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatteryKind {
    /// `N+1` equally spaced levels with `A_n = 1`.
    UniformLadder,
    /// Spin-`J` multiplet with `H_B = E_B·J_z` and `A_m = √(J(J+1) − m(m+1))`.
    LargeSpin,
    /// Truncated harmonic oscillator with `A_n = √(n+1)`.
    TruncatedHO,
}

/// A battery: its level energies and the ladder coefficients of `A†`.
///
/// Levels are indexed `0..dim` from the lowest energy upward. For the large
/// spin the index is `n = m + J`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryModel {
    kind: BatteryKind,
    dim: usize,
    energy_quantum: f64,
    level_energies: Vec<f64>,
    ladder_coeffs: Vec<f64>,
}

fn check_energy_quantum(e_b: f64) -> Result<()> {
    if !(e_b.is_finite() && e_b > 0.0) {
        return Err(Error::InvalidParameter { name: "energy_quantum", reason: format!("must be positive and finite, got {e_b}") });
    }
    Ok(())
}

impl BatteryModel {
    /// Uniform ladder with `n_max + 1` levels.
    pub fn uniform_ladder(n_max: usize, energy_quantum: f64) -> Result<Self> {
        check_energy_quantum(energy_quantum)?;
        if n_max == 0 {
            return Err(Error::InvalidParameter { name: "N", reason: "battery needs at least two levels".into() });
        }
        Ok(Self {
            kind: BatteryKind::UniformLadder,
            dim: n_max + 1,
            energy_quantum,
            level_energies: (0..=n_max).map(|n| energy_quantum * n as f64).collect(),
            ladder_coeffs: vec![1.0; n_max],
        })
    }

    /// Spin battery from twice the spin quantum number, so half-integer `J`
    /// is exact: `two_j = 1` is a spin-1/2.
    pub fn large_spin(two_j: usize, energy_quantum: f64) -> Result<Self> {
        check_energy_quantum(energy_quantum)?;
        if two_j == 0 {
            return Err(Error::InvalidParameter { name: "J", reason: "J must be positive".into() });
        }
        let j = two_j as f64 / 2.0;
        let dim = two_j + 1;
        let m_of = |n: usize| n as f64 - j;
        Ok(Self {
            kind: BatteryKind::LargeSpin,
            dim,
            energy_quantum,
            level_energies: (0..dim).map(|n| energy_quantum * m_of(n)).collect(),
            ladder_coeffs: (0..dim - 1)
                .map(|n| {
                    let m = m_of(n);
                    (j * (j + 1.0) - m * (m + 1.0)).sqrt()
                })
                .collect(),
        })
    }

    /// Spin battery from `J` itself; `2J` must be a positive integer.
    pub fn large_spin_from_j(j: f64, energy_quantum: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !(two_j.is_finite() && two_j >= 1.0 && (two_j - two_j.round()).abs() < 1e-12) {
            return Err(Error::InvalidParameter { name: "J", reason: format!("2J must be a positive integer, got J = {j}") });
        }
        Self::large_spin(two_j.round() as usize, energy_quantum)
    }

    /// Truncated oscillator with `n_max + 1` Fock levels.
    pub fn truncated_ho(n_max: usize, energy_quantum: f64) -> Result<Self> {
        check_energy_quantum(energy_quantum)?;
        if n_max == 0 {
            return Err(Error::InvalidParameter { name: "N", reason: "battery needs at least two levels".into() });
        }
        Ok(Self {
            kind: BatteryKind::TruncatedHO,
            dim: n_max + 1,
            energy_quantum,
            level_energies: (0..=n_max).map(|n| energy_quantum * n as f64).collect(),
            ladder_coeffs: (0..n_max).map(|n| ((n + 1) as f64).sqrt()).collect(),
        })
    }

    pub fn kind(&self) -> BatteryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energy_quantum(&self) -> f64 {
        self.energy_quantum
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    pub fn ladder_coeffs(&self) -> &[f64] {
        &self.ladder_coeffs
    }

    /// `A_n`, zero at and above the top level.
    pub fn ladder_coeff(&self, n: usize) -> f64 {
        self.ladder_coeffs.get(n).copied().unwrap_or(0.0)
    }

    /// Index of the highest level.
    pub fn top_level(&self) -> usize {
        self.dim - 1
    }

    /// `J` for spin batteries.
    pub fn spin_j(&self) -> Option<f64> {
        (self.kind == BatteryKind::LargeSpin).then(|| (self.dim - 1) as f64 / 2.0)
    }

    /// Physical quantum number of a level: `m = n − J` for spins, `n` otherwise.
    pub fn quantum_number(&self, level: usize) -> f64 {
        match self.spin_j() {
            Some(j) => level as f64 - j,
            None => level as f64,
        }
    }

    /// Level index of spin projection `m`.
    pub fn level_of_m(&self, m: f64) -> Option<usize> {
        let j = self.spin_j()?;
        let n = m + j;
        (n >= -1e-12 && (n - n.round()).abs() < 1e-12 && (n.round() as usize) < self.dim).then(|| n.round() as usize)
    }

    /// Maximum ergotropy, `E_top − E_bottom`.
    pub fn max_ergotropy(&self) -> f64 {
        self.level_energies[self.dim - 1] - self.level_energies[0]
    }

    /// `H_B` as a diagonal matrix.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.level_energies)
    }
}

/// Decay rates of the three qutrit channels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecayRates {
    /// `|h⟩ → |g⟩`
    pub hg: f64,
    /// `|e⟩ → |g⟩`
    pub eg: f64,
    /// `|h⟩ → |e⟩`
    pub he: f64,
}

/// Rotating-frame charger parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargerParams {
    detuning_h: f64,
    detuning_e: f64,
    drive: f64,
    rates: DecayRates,
    coupling: f64,
}

fn nonneg(name: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::InvalidParameter { name, reason: format!("must be finite and nonnegative, got {x}") });
    }
    Ok(())
}

impl ChargerParams {
    /// `detuning_h` is Δ (on `|h⟩`), `detuning_e` is δ (on `|e⟩`), `drive` is
    /// Ω and `coupling` is the charger–battery strength g.
    pub fn new(detuning_h: f64, detuning_e: f64, drive: f64, rates: DecayRates, coupling: f64) -> Result<Self> {
        for (name, x) in [("Delta", detuning_h), ("delta", detuning_e)] {
            if !x.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite, got {x}") });
            }
        }
        nonneg("Omega", drive)?;
        nonneg("gamma_hg", rates.hg)?;
        nonneg("gamma_eg", rates.eg)?;
        nonneg("gamma_he", rates.he)?;
        nonneg("g", coupling)?;
        Ok(Self { detuning_h, detuning_e, drive, rates, coupling })
    }

    pub fn with_coupling(self, coupling: f64) -> Result<Self> {
        Self::new(self.detuning_h, self.detuning_e, self.drive, self.rates, coupling)
    }

    pub fn with_drive(self, drive: f64) -> Result<Self> {
        Self::new(self.detuning_h, self.detuning_e, drive, self.rates, self.coupling)
    }

    pub fn with_rates(self, rates: DecayRates) -> Result<Self> {
        Self::new(self.detuning_h, self.detuning_e, self.drive, rates, self.coupling)
    }

    pub fn detuning_h(&self) -> f64 {
        self.detuning_h
    }

    pub fn detuning_e(&self) -> f64 {
        self.detuning_e
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    pub fn rates(&self) -> DecayRates {
        self.rates
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `Δ̃ = Δ − i(γ_hg + γ_he)/2`
    pub fn complex_detuning_h(&self) -> C64 {
        C64::new(self.detuning_h, -(self.rates.hg + self.rates.he) / 2.0)
    }

    /// `δ̃ = δ − iγ_eg/2`
    pub fn complex_detuning_e(&self) -> C64 {
        C64::new(self.detuning_e, -self.rates.eg / 2.0)
    }

    /// `Δ̃·δ̃`
    pub fn detuning_product(&self) -> C64 {
        self.complex_detuning_h() * self.complex_detuning_e()
    }

    /// `φ = arg(Δ̃δ̃)`
    pub fn phase(&self) -> f64 {
        self.detuning_product().arg()
    }
}

/// Qutrit levels in composite-basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QutritLevel {
    G = 0,
    H = 1,
    E = 2,
}

/// Composite index of `|level⟩ ⊗ |n⟩`.
#[inline]
pub fn composite_index(level: QutritLevel, n: usize, battery_dim: usize) -> usize {
    level as usize * battery_dim + n
}

/// `A† = Σ A_n |n+1⟩⟨n|`
pub fn ladder_raising_operator(b: &BatteryModel) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(b.dim, b.dim);
    for (n, &coeff) in b.ladder_coeffs.iter().enumerate() {
        a[(n + 1, n)] = C64::new(coeff, 0.0);
    }
    a
}

/// Rotating-frame Hamiltonian `Δ|h⟩⟨h| + δ|e⟩⟨e| + Ω(|h⟩⟨g| + h.c.) + g(A†|e⟩⟨h| + h.c.)`.
pub fn composite_hamiltonian(b: &BatteryModel, c: &ChargerParams) -> ComplexMatrix {
    let d = b.dim;
    let mut h = ComplexMatrix::zeros(3 * d, 3 * d);
    let idx = |lvl, n| composite_index(lvl, n, d);
    for n in 0..d {
        h[(idx(QutritLevel::H, n), idx(QutritLevel::H, n))] = C64::new(c.detuning_h, 0.0);
        h[(idx(QutritLevel::E, n), idx(QutritLevel::E, n))] = C64::new(c.detuning_e, 0.0);
        let drive = C64::new(c.drive, 0.0);
        h[(idx(QutritLevel::H, n), idx(QutritLevel::G, n))] = drive;
        h[(idx(QutritLevel::G, n), idx(QutritLevel::H, n))] = drive;
    }
    for (n, &coeff) in b.ladder_coeffs.iter().enumerate() {
        let x = C64::new(c.coupling * coeff, 0.0);
        h[(idx(QutritLevel::E, n + 1), idx(QutritLevel::H, n))] = x;
        h[(idx(QutritLevel::H, n), idx(QutritLevel::E, n + 1))] = x;
    }
    h
}

/// Jump operators `√γ_hg|g⟩⟨h|`, `√γ_eg|g⟩⟨e|`, `√γ_he|e⟩⟨h|` (each `⊗ I`),
/// in that order. Channels with zero rate are left out.
pub fn jump_operators(b: &BatteryModel, c: &ChargerParams) -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(b.dim);
    [
        (c.rates.hg, QutritLevel::G, QutritLevel::H),
        (c.rates.eg, QutritLevel::G, QutritLevel::E),
        (c.rates.he, QutritLevel::E, QutritLevel::H),
    ]
    .into_iter()
    .filter(|&(rate, _, _)| rate > 0.0)
    .map(|(rate, to, from)| kron(&ComplexMatrix::outer_basis(3, to as usize, from as usize), &id).scale_real(rate.sqrt()))
    .collect()
}
