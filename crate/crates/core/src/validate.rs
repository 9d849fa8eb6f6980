//! Seeded invariant battery: resolvent identities, golden-rule series,
//! superoperator consistency and generator sanity checks.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{DensityMatrix, LindbladGenerator};
use crate::error::Result;
use crate::model::{BatteryModel, ChargerParams, DecayRates};
use crate::numerics::{hermitian_eigh, integrate_ode, solve_linear, ComplexMatrix, Tolerances, C64};
use crate::perturbation::{
    closed_form_subspace, effective_operators_subspace, fgr_effective_coupling, fgr_series_check, vectorized_generator,
    SubspaceSystem,
};
use crate::protocol::{gamma_eff, optimal_coupling, optimized_rate_uniform};

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{:.3e},{:.3e},{}", self.name, self.measured, self.bound, if self.pass { "pass" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, measured: f64, bound: f64) {
        // NaN fails.
        let pass = measured <= bound;
        self.checks.push(CheckResult { name, measured, bound, pass });
    }
}

/// Evaluates a master-equation right-hand side into its last argument.
pub type RhsEvaluator = dyn Fn(&LindbladGenerator, &ComplexMatrix, &mut ComplexMatrix);

/// Draws used by the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub parameter_draws: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { seed: 2024, parameter_draws: 200 }
    }
}

fn signed(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let x = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

fn random_setup(rng: &mut impl Rng) -> Result<(BatteryModel, ChargerParams)> {
    let size = rng.gen_range(1..12);
    let b = match rng.gen_range(0..3) {
        0 => BatteryModel::uniform_ladder(size, 1.0)?,
        1 => BatteryModel::large_spin(size, 1.0)?,
        _ => BatteryModel::truncated_ho(size, 1.0)?,
    };
    let rates = DecayRates { hg: rng.gen_range(1e-3..0.2), eg: rng.gen_range(1e-3..0.05), he: rng.gen_range(0.0..0.05) };
    let c = ChargerParams::new(
        signed(rng, 0.01, 0.5),
        signed(rng, 0.005, 0.1),
        rng.gen_range(1e-4..0.05),
        rates,
        rng.gen_range(0.0..0.1),
    )?;
    Ok((b, c))
}

fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = b.norm().max(a.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn random_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_state(n: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let g = random_matrix(n, rng);
    let p = &g * &g.adjoint();
    let tr = p.trace().re;
    DensityMatrix::new(p.scale_real(1.0 / tr))
}

fn random_generator(n: usize, jumps: usize, rng: &mut impl Rng) -> Result<LindbladGenerator> {
    let g = random_matrix(n, rng);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    LindbladGenerator::new(h, (0..jumps).map(|_| random_matrix(n, rng).scale_real(0.5)).collect())
}

/// Runs every check with the generator's own right-hand side.
pub fn run_validation(opts: ValidationOptions) -> Result<ValidationReport> {
    run_validation_with(opts, &|g, x, y| g.apply(x, y))
}

/// Runs every check, evaluating master-equation right-hand sides with `rhs`.
pub fn run_validation_with(opts: ValidationOptions, rhs: &RhsEvaluator) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = ValidationReport::default();

    // Resolvent coefficients against closed forms, and the leakage balance.
    let (mut worst_cf, mut worst_balance) = (0.0f64, 0.0f64);
    for _ in 0..opts.parameter_draws {
        let (b, c) = random_setup(&mut rng)?;
        let n = rng.gen_range(0..b.dim());
        let s = SubspaceSystem::new(&b, &c, n)?;
        let res = effective_operators_subspace(&s)?;
        let cf = closed_form_subspace(&b, &c, n)?;
        for (x, y) in [(res.complex_hamiltonian, cf.complex_hamiltonian), (res.l_hg, cf.l_hg), (res.l_eg, cf.l_eg), (res.l_he, cf.l_he)] {
            worst_cf = worst_cf.max(rel_diff(x, y));
        }
        let lhs = res.complex_hamiltonian.im + 0.5 * (res.l_hg.norm_sqr() + res.l_eg.norm_sqr());
        worst_balance = worst_balance.max((lhs + 0.5 * res.l_he.norm_sqr()).abs() / res.complex_hamiltonian.norm());
    }
    report.push("resolvent_vs_closed_form", worst_cf, 1e-10);
    report.push("leakage_balance", worst_balance, 1e-12);

    // Golden-rule series: geometric structure and convergence.
    let (mut worst_ratio, mut worst_residual) = (0.0f64, 0.0f64);
    for _ in 0..opts.parameter_draws.min(50) {
        let (b, c) = random_setup(&mut rng)?;
        let n = rng.gen_range(0..b.top_level());
        let target = rng.gen_range(0.05..0.5);
        let g = (target * c.detuning_product().norm()).sqrt() / b.ladder_coeff(n);
        let s = SubspaceSystem::new(&b, &c.with_coupling(g)?, n)?;
        let ratio = {
            let h = &s.excited_hamiltonian;
            h[(0, 1)] * h[(1, 0)] / (h[(0, 0)] * h[(1, 1)])
        };
        for l in 1..40 {
            let a = fgr_effective_coupling(&s, l)?;
            let b2 = fgr_effective_coupling(&s, l + 2)?;
            worst_ratio = worst_ratio.max(rel_diff(b2 / a, ratio));
        }
        worst_residual = worst_residual.max(fgr_series_check(&s, 120)?.max_residual());
    }
    report.push("fgr_geometric_ratio", worst_ratio, 1e-12);
    report.push("fgr_series_residual", worst_residual, 1e-10);

    // Optimal coupling gives the level-independent optimum.
    let mut worst_opt = 0.0f64;
    for _ in 0..opts.parameter_draws.min(50) {
        let (b, c) = random_setup(&mut rng)?;
        let n = rng.gen_range(0..b.top_level());
        let at = c.with_coupling(optimal_coupling(&b, &c, n)?)?;
        let r = optimized_rate_uniform(&c)?;
        worst_opt = worst_opt.max((gamma_eff(&b, &at, n)? - r).abs() / r);
    }
    report.push("optimal_rate_identity", worst_opt, 1e-12);

    // Right-hand side sanity and the superoperator against it.
    let (mut worst_trace, mut worst_herm, mut worst_vec, mut worst_vec_trace) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.gen_range(2..6);
        let gen = random_generator(n, 2, &mut rng)?;
        let rho = random_state(n, &mut rng)?;
        let mut out = ComplexMatrix::zeros(n, n);
        rhs(&gen, rho.matrix(), &mut out);
        worst_trace = worst_trace.max(out.trace().norm());
        worst_herm = worst_herm.max(out.hermitian_defect());
        let big = vectorized_generator(&gen)?;
        let via = big.matvec(&rho.matrix().vectorize())?;
        let direct = out.vectorize();
        worst_vec = worst_vec.max(via.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        for col in 0..n * n {
            let s: C64 = (0..n).map(|i| big[(i * n + i, col)]).sum();
            worst_vec_trace = worst_vec_trace.max(s.norm());
        }
    }
    report.push("rhs_trace_preservation", worst_trace, 1e-12);
    report.push("rhs_hermiticity", worst_herm, 1e-12);
    report.push("vectorized_vs_direct", worst_vec, 1e-12);
    report.push("vectorized_trace_preservation", worst_vec_trace, 1e-12);

    // Integrating the superoperator against integrating the direct form.
    let mut worst_prop = 0.0f64;
    let tight = Tolerances { rel: 1e-12, abs: 1e-14 };
    for _ in 0..3 {
        let gen = random_generator(3, 2, &mut rng)?;
        let rho = random_state(3, &mut rng)?;
        let horizon = 10.0 / gen.hamiltonian().frobenius_norm();
        let grid = [0.0, horizon];
        let direct = integrate_ode(|x: &ComplexMatrix, y: &mut ComplexMatrix| rhs(&gen, x, y), rho.matrix(), &grid, tight)?;
        let big = vectorized_generator(&gen)?;
        let v0 = ComplexMatrix::new(9, 1, rho.matrix().vectorize())?;
        let vec_path = integrate_ode(
            |x: &ComplexMatrix, y: &mut ComplexMatrix| {
                let r = big.matvec(x.as_slice()).expect("dimensions agree");
                y.as_mut_slice().copy_from_slice(&r);
            },
            &v0,
            &grid,
            tight,
        )?;
        let end = ComplexMatrix::unvectorize(vec_path[1].as_slice(), 3)?;
        worst_prop = worst_prop.max((&end - &direct[1]).max_abs());
    }
    report.push("vectorized_propagation", worst_prop, 1e-8);

    // Linear algebra primitives.
    let mut worst_eigh = 0.0f64;
    for &n in &[4usize, 16, 64] {
        let g = random_matrix(n, &mut rng);
        let m = (&g + &g.adjoint()).scale_real(0.5);
        let d = hermitian_eigh(&m)?;
        let unitary = (&(&d.eigenvectors.adjoint() * &d.eigenvectors) - &ComplexMatrix::identity(n)).max_abs();
        worst_eigh = worst_eigh.max(unitary).max((&d.reconstruct() - &m).max_abs());
    }
    report.push("eigh_reconstruction", worst_eigh, 1e-9);

    let mut worst_solve = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..9);
        let a = &random_matrix(n, &mut rng) + &ComplexMatrix::identity(n).scale_real(3.0);
        let b: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let x = solve_linear(&a, &b)?;
        let ax = a.matvec(&x)?;
        let res = ax.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let xn = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst_solve = worst_solve.max(res / (a.frobenius_norm() * xn + bn));
    }
    report.push("solve_residual", worst_solve, 1e-10);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes() {
        let report = run_validation(ValidationOptions { seed: 1, parameter_draws: 40 }).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{c}");
        }
        assert!(report.get("fgr_series_residual").unwrap().measured < 1e-10);
    }

    #[test]
    fn flipped_dissipator_sign_is_caught() {
        // Anticommutator added instead of subtracted.
        let broken = |g: &LindbladGenerator, x: &ComplexMatrix, y: &mut ComplexMatrix| {
            g.apply(x, y);
            for l in g.jumps() {
                let ldl = &l.adjoint() * l;
                let anti = &(&ldl * x) + &(x * &ldl);
                *y = &*y + &anti;
            }
        };
        let report = run_validation_with(ValidationOptions { seed: 1, parameter_draws: 10 }, &broken).unwrap();
        assert!(!report.all_passed());
        assert!(!report.get("rhs_trace_preservation").unwrap().pass);
        assert!(report.get("resolvent_vs_closed_form").unwrap().pass);
    }
}
