use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::tolerances::{STATE_HERMITIAN_TOL, STATE_POSITIVITY_TOL, STATE_TRACE_TOL};
use crate::numerics::{cholesky_succeeds, hermitian_eigenvalues, kron, ComplexMatrix, C64};

/// A validated density matrix: unit trace, Hermitian and positive
/// semidefinite, each within the frozen state tolerances.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("DensityMatrix").field(&self.m).finish()
    }
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::check(&m)?;
        Ok(Self { m })
    }

    /// Checks the density-matrix invariants without taking ownership.
    pub fn check(m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: "nonempty square matrix".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        m.ensure_finite()?;
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let defect = m.hermitian_defect();
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {defect:.3e}")));
        }
        if !cholesky_succeeds(m, STATE_POSITIVITY_TOL) {
            let min = hermitian_eigenvalues(m).ok().and_then(|ev| ev.first().copied());
            return Err(Error::InvalidState(match min {
                Some(x) => format!("minimum eigenvalue {x:.3e} below -{STATE_POSITIVITY_TOL:e}"),
                None => "not positive semidefinite".into(),
            }));
        }
        Ok(())
    }

    /// `|level⟩⟨level|`
    pub fn pure_level(dim: usize, level: usize) -> Result<Self> {
        if level >= dim {
            return Err(Error::DimensionMismatch { expected: format!("level < {dim}"), found: level.to_string() });
        }
        Ok(Self { m: ComplexMatrix::outer_basis(dim, level, level) })
    }

    /// Diagonal state with the given level populations.
    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(p))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// `a ⊗ b`
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self { m: kron(&a.m, &b.m) }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    /// Diagonal entries (real parts).
    pub fn populations(&self) -> Vec<f64> {
        self.m.real_diag()
    }

    pub fn is_diagonal(&self) -> bool {
        self.m.is_diagonal()
    }

    /// Traces out the leading factor of dimension `dim / inner_dim`, leaving
    /// the trailing `inner_dim`-dimensional state.
    pub fn partial_trace_leading(&self, inner_dim: usize) -> Result<Self> {
        let d = self.dim();
        if inner_dim == 0 || d % inner_dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension divisible by {inner_dim}"),
                found: d.to_string(),
            });
        }
        let outer = d / inner_dim;
        let m = ComplexMatrix::from_fn(inner_dim, inner_dim, |r, c| {
            (0..outer).map(|i| self.m[(i * inner_dim + r, i * inner_dim + c)]).sum()
        });
        Self::new(m)
    }

    /// Population of leading-factor level `level`: `Tr[(|level⟩⟨level| ⊗ I) ρ]`.
    pub fn leading_population(&self, inner_dim: usize, level: usize) -> f64 {
        (0..inner_dim).map(|n| self.m[(level * inner_dim + n, level * inner_dim + n)].re).sum()
    }

    /// Trace distance proxy: largest entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.m - &other.m).max_abs()
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.m
    }
}
