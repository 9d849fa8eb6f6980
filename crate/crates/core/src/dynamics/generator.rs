use crate::error::{Error, Result};
use crate::numerics::matrix::{I, ZERO};
use crate::numerics::tolerances::HERMITIAN_TOL;
use crate::numerics::{ComplexMatrix, C64};

use super::state::DensityMatrix;

/// Nonzero entries of a matrix as `(row, col, value)`.
#[derive(Debug, Clone, Default)]
struct Triplets(Vec<(usize, usize, C64)>);

impl Triplets {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut out = Vec::new();
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v != ZERO {
                    out.push((r, c, v));
                }
            }
        }
        Self(out)
    }
}

/// A master-equation generator `ρ̇ = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
///
/// Evaluation runs on a sparse copy of `H_nh = H − (i/2)Σ L_k†L_k` and of the
/// jumps, which is much cheaper than dense products for the operators built
/// by this crate.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
    h_nh: Triplets,
    sparse_jumps: Vec<Triplets>,
}

/// Population-transfer form of a generator that maps diagonal states to
/// diagonal states: `ṗ_to += rate·p_from` and `ṗ_from −= rate·p_from`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRates {
    pub dim: usize,
    /// `(to, from, rate)` with `to ≠ from`.
    pub transfers: Vec<(usize, usize, f64)>,
}

impl PopulationRates {
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for &(to, from, rate) in &self.transfers {
            let flow = rate * p[from];
            out[to] += flow;
            out[from] -= flow;
        }
    }
}

impl LindbladGenerator {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square Hamiltonian".into(),
                found: format!("{}x{}", hamiltonian.rows(), hamiltonian.cols()),
            });
        }
        hamiltonian.ensure_finite()?;
        let d = hamiltonian.rows();
        let tolerance = HERMITIAN_TOL * hamiltonian.frobenius_norm().max(1.0);
        let defect = hamiltonian.hermitian_defect();
        if defect > tolerance {
            return Err(Error::NotHermitian { max_asymmetry: defect, tolerance });
        }
        for l in &jumps {
            if l.rows() != d || l.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: format!("{d}x{d} jump operator"),
                    found: format!("{}x{}", l.rows(), l.cols()),
                });
            }
            l.ensure_finite()?;
        }
        let mut h_nh = hamiltonian.clone();
        for l in &jumps {
            let ldl = &l.adjoint() * l;
            h_nh.axpy(C64::new(0.0, -0.5), &ldl);
        }
        let h_nh = Triplets::from_dense(&h_nh);
        let sparse_jumps = jumps.iter().map(Triplets::from_dense).collect();
        Ok(Self { hamiltonian, jumps, h_nh, sparse_jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    /// Writes the generator's action on an arbitrary square matrix into `out`.
    pub fn apply(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let d = self.dim();
        let x = rho.as_slice();
        let y = out.as_mut_slice();
        y.fill(ZERO);
        // −i·H_nh·ρ
        for &(r, c, v) in &self.h_nh.0 {
            let w = -I * v;
            let (src, dst) = (&x[c * d..(c + 1) * d], &mut y[r * d..(r + 1) * d]);
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += w * s;
            }
        }
        // +i·ρ·H_nh†
        for a in 0..d {
            let (src, dst) = (&x[a * d..(a + 1) * d], &mut y[a * d..(a + 1) * d]);
            for &(r, c, v) in &self.h_nh.0 {
                dst[r] += I * v.conj() * src[c];
            }
        }
        self.add_jump_terms(x, y, d);
    }

    /// Same as [`apply`](Self::apply) for Hermitian `rho`, computing only
    /// `−i·H_nh·ρ` and adding its adjoint. The result is exactly Hermitian.
    pub fn apply_hermitian(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let d = self.dim();
        let x = rho.as_slice();
        let y = out.as_mut_slice();
        y.fill(ZERO);
        for &(r, c, v) in &self.h_nh.0 {
            let w = -I * v;
            let (src, dst) = (&x[c * d..(c + 1) * d], &mut y[r * d..(r + 1) * d]);
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += w * s;
            }
        }
        for r in 0..d {
            y[r * d + r] = C64::new(2.0 * y[r * d + r].re, 0.0);
            for c in (r + 1)..d {
                let s = y[r * d + c] + y[c * d + r].conj();
                y[r * d + c] = s;
                y[c * d + r] = s.conj();
            }
        }
        self.add_jump_terms(x, y, d);
    }

    fn add_jump_terms(&self, x: &[C64], y: &mut [C64], d: usize) {
        for l in &self.sparse_jumps {
            for &(r1, c1, v1) in &l.0 {
                for &(r2, c2, v2) in &l.0 {
                    y[r1 * d + r2] += v1 * v2.conj() * x[c1 * d + c2];
                }
            }
        }
    }

    /// The diagonal-to-diagonal transfer rates, when the generator has
    /// them: `H` diagonal and every jump with at most one nonzero entry per
    /// row and per column.
    pub fn population_rates(&self) -> Option<PopulationRates> {
        if !self.hamiltonian.is_diagonal() {
            return None;
        }
        let d = self.dim();
        let mut transfers = Vec::new();
        for l in &self.sparse_jumps {
            let mut row_seen = vec![false; d];
            let mut col_seen = vec![false; d];
            for &(r, c, v) in &l.0 {
                if std::mem::replace(&mut row_seen[r], true) || std::mem::replace(&mut col_seen[c], true) {
                    return None;
                }
                if r != c {
                    transfers.push((r, c, v.norm_sqr()));
                }
            }
        }
        Some(PopulationRates { dim: d, transfers })
    }
}

/// `−i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`
pub fn lindblad_rhs(gen: &LindbladGenerator, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != gen.dim() {
        return Err(Error::DimensionMismatch { expected: format!("dimension {}", gen.dim()), found: rho.dim().to_string() });
    }
    let mut out = ComplexMatrix::zeros(gen.dim(), gen.dim());
    gen.apply(rho.matrix(), &mut out);
    Ok(out)
}
