//! LU solves with partial pivoting, and a Cholesky positivity probe.

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::tolerances::{SOLVE_MAX_CONDITION, SOLVE_RESIDUAL_TOL};
use crate::error::{Error, Result};

struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &ComplexMatrix) -> Option<Lu> {
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag == 0.0 {
                return None;
            }
            if pivot_row != k {
                for c in 0..n {
                    lu.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor == ZERO {
                    continue;
                }
                for c in (k + 1)..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= factor * u;
                }
            }
        }
        Some(Lu { n, lu, perm })
    }

    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let s: C64 = (0..r).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: C64 = ((r + 1)..n).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] = (x[r] - s) / self.lu[r * n + r];
        }
        x
    }
}

fn norm1(a: &ComplexMatrix) -> f64 {
    (0..a.cols())
        .map(|c| (0..a.rows()).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `a·x = b` for square `a`.
///
/// The 1-norm condition number is computed from the explicit inverse; the
/// systems solved in this crate are at most a few dozen unknowns.
pub fn solve_linear(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("square system with {} rows", b.len()),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    a.ensure_finite()?;
    let n = a.rows();
    let lu = Lu::factor(a).ok_or(Error::Singular { condition: f64::INFINITY })?;

    let mut inv_norm1 = 0.0f64;
    let mut unit = vec![ZERO; n];
    for c in 0..n {
        unit[c] = C64::new(1.0, 0.0);
        let col = lu.solve(&unit);
        inv_norm1 = inv_norm1.max(col.iter().map(|z| z.norm()).sum());
        unit[c] = ZERO;
    }
    let condition = norm1(a) * inv_norm1;
    if !condition.is_finite() || condition > SOLVE_MAX_CONDITION {
        return Err(Error::Singular { condition });
    }

    let x = lu.solve(b);
    let ax = a.matvec(&x)?;
    let residual = vec_norm(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    let bound = SOLVE_RESIDUAL_TOL * (a.frobenius_norm() * vec_norm(&x) + vec_norm(b));
    if !(residual <= bound) {
        return Err(Error::Singular { condition });
    }
    Ok(x)
}

/// Attempts a Cholesky factorization of `m + shift·I`; success means every
/// eigenvalue of the Hermitian matrix `m` exceeds `−shift`.
pub fn cholesky_succeeds(m: &ComplexMatrix, shift: f64) -> bool {
    let n = m.rows();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut d = m[(j, j)].re + shift;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}
