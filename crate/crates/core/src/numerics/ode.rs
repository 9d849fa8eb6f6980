//! Adaptive Dormand–Prince 5(4) integration with PI step control.
//!
//! The integrator steps exactly onto every requested output time, so grid
//! values carry the full local accuracy of the method without interpolation.

use super::matrix::{ComplexMatrix, C64};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// A vector-space value the integrator can advance.
pub trait OdeState: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a·x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn assign(&mut self, x: &Self);
    /// `self = a·x`
    fn assign_scaled(&mut self, a: f64, x: &Self);
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Modulus of the `i`-th component.
    fn abs_at(&self, i: usize) -> f64;
    fn is_finite(&self) -> bool;
}

impl OdeState for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (y, &xv) in self.iter_mut().zip(x) {
            *y += a * xv;
        }
    }

    fn assign(&mut self, x: &Self) {
        self.copy_from_slice(x);
    }

    fn assign_scaled(&mut self, a: f64, x: &Self) {
        for (y, &xv) in self.iter_mut().zip(x) {
            *y = a * xv;
        }
    }

    fn len(&self) -> usize {
        Vec::len(self)
    }

    #[inline]
    fn abs_at(&self, i: usize) -> f64 {
        self[i].abs()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl OdeState for ComplexMatrix {
    fn zeros_like(&self) -> Self {
        ComplexMatrix::zeros(self.rows(), self.cols())
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (y, &xv) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *y += xv * a;
        }
    }

    fn assign(&mut self, x: &Self) {
        self.as_mut_slice().copy_from_slice(x.as_slice());
    }

    fn assign_scaled(&mut self, a: f64, x: &Self) {
        for (y, &xv) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *y = xv * a;
        }
    }

    fn len(&self) -> usize {
        self.as_slice().len()
    }

    #[inline]
    fn abs_at(&self, i: usize) -> f64 {
        let z: C64 = self.as_slice()[i];
        z.norm()
    }

    fn is_finite(&self) -> bool {
        ComplexMatrix::is_finite(self)
    }
}

/// Work counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand–Prince 5(4) tableau. The right-hand side is autonomous, so the
// node times are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn validate_grid(t_grid: &[f64], tol: Tolerances) -> Result<()> {
    let first = *t_grid.first().ok_or_else(|| Error::InvalidGrid("empty time grid".into()))?;
    if first != 0.0 {
        return Err(Error::InvalidGrid(format!("grid must start at 0, starts at {first}")));
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidGrid(format!("grid not strictly increasing at {} -> {}", w[0], w[1])));
    }
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(Error::InvalidGrid(format!("tolerances must be positive, got {tol:?}")));
    }
    Ok(())
}

fn error_norm<S: OdeState>(err: &S, y0: &S, y1: &S, tol: Tolerances) -> f64 {
    let n = err.len();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let sc = tol.abs + tol.rel * y0.abs_at(i).max(y1.abs_at(i));
        let r = err.abs_at(i) / sc;
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

/// Integrates `dy/dt = rhs(y)` and hands the state at every grid time to
/// `observer`. An observer error aborts the integration and is returned.
pub fn integrate_ode_with<S, F, O>(
    mut rhs: F,
    y0: &S,
    t_grid: &[f64],
    tol: Tolerances,
    mut observer: O,
) -> Result<IntegrationStats>
where
    S: OdeState,
    F: FnMut(&S, &mut S),
    O: FnMut(usize, f64, &S) -> Result<()>,
{
    validate_grid(t_grid, tol)?;
    if !y0.is_finite() {
        return Err(Error::IntegrationDiverged { time: 0.0 });
    }
    let mut stats = IntegrationStats::default();
    observer(0, 0.0, y0)?;
    if t_grid.len() == 1 {
        return Ok(stats);
    }

    let mut y = y0.clone();
    let mut k1 = y.zeros_like();
    let mut k2 = y.zeros_like();
    let mut k3 = y.zeros_like();
    let mut k4 = y.zeros_like();
    let mut k5 = y.zeros_like();
    let mut k6 = y.zeros_like();
    let mut k7 = y.zeros_like();
    let mut stage = y.zeros_like();
    let mut y_new = y.zeros_like();
    let mut err = y.zeros_like();

    rhs(&y, &mut k1);
    stats.rhs_evals += 1;

    let horizon = *t_grid.last().unwrap();
    let mut h = initial_step(&mut rhs, &y, &k1, tol, horizon, &mut stats);
    let mut t = 0.0_f64;
    let mut next = 1;
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;

    while next < t_grid.len() {
        let target = t_grid[next];
        let min_step = 1e-14 * t.abs().max(1.0);
        if h < min_step {
            return Err(Error::StepUnderflow { time: t, step: h });
        }
        let hits = t + h * 1.0001 >= target;
        let step = if hits { target - t } else { h };

        stage.assign(&y);
        stage.axpy(step * A21, &k1);
        rhs(&stage, &mut k2);

        stage.assign(&y);
        stage.axpy(step * A31, &k1);
        stage.axpy(step * A32, &k2);
        rhs(&stage, &mut k3);

        stage.assign(&y);
        stage.axpy(step * A41, &k1);
        stage.axpy(step * A42, &k2);
        stage.axpy(step * A43, &k3);
        rhs(&stage, &mut k4);

        stage.assign(&y);
        stage.axpy(step * A51, &k1);
        stage.axpy(step * A52, &k2);
        stage.axpy(step * A53, &k3);
        stage.axpy(step * A54, &k4);
        rhs(&stage, &mut k5);

        stage.assign(&y);
        stage.axpy(step * A61, &k1);
        stage.axpy(step * A62, &k2);
        stage.axpy(step * A63, &k3);
        stage.axpy(step * A64, &k4);
        stage.axpy(step * A65, &k5);
        rhs(&stage, &mut k6);

        y_new.assign(&y);
        y_new.axpy(step * A71, &k1);
        y_new.axpy(step * A73, &k3);
        y_new.axpy(step * A74, &k4);
        y_new.axpy(step * A75, &k5);
        y_new.axpy(step * A76, &k6);
        rhs(&y_new, &mut k7);
        stats.rhs_evals += 6;

        err.assign_scaled(step * E1, &k1);
        err.axpy(step * E3, &k3);
        err.axpy(step * E4, &k4);
        err.axpy(step * E5, &k5);
        err.axpy(step * E6, &k6);
        err.axpy(step * E7, &k7);
        let mut e = error_norm(&err, &y, &y_new, tol);
        if !e.is_finite() || !y_new.is_finite() {
            e = f64::INFINITY;
        }

        let fac11 = e.powf(EXPO);
        if e <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_next = step / fac;
            if last_rejected {
                h_next = h_next.min(step);
            }
            fac_old = e.max(1e-4);
            last_rejected = false;
            stats.accepted += 1;

            t = if hits { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            if hits {
                observer(next, t, &y)?;
                next += 1;
                // A clamped step says nothing about the admissible size.
                h = h_next.max(h);
            } else {
                h = h_next;
            }
        } else {
            let shrink = if e.is_finite() { (fac11 / SAFETY).min(1.0 / FAC_MIN) } else { 1.0 / FAC_MIN };
            h = step / shrink;
            last_rejected = true;
            stats.rejected += 1;
        }
    }
    Ok(stats)
}

/// Integrates and collects the state at every grid point.
pub fn integrate_ode<S, F>(rhs: F, y0: &S, t_grid: &[f64], tol: Tolerances) -> Result<Vec<S>>
where
    S: OdeState,
    F: FnMut(&S, &mut S),
{
    let mut out = Vec::with_capacity(t_grid.len());
    integrate_ode_with(rhs, y0, t_grid, tol, |_, _, y| {
        out.push(y.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Starting step after Hairer, Nørsett & Wanner (II.4).
fn initial_step<S, F>(rhs: &mut F, y: &S, f0: &S, tol: Tolerances, horizon: f64, stats: &mut IntegrationStats) -> f64
where
    S: OdeState,
    F: FnMut(&S, &mut S),
{
    let scaled = |v: &S| {
        let n = v.len().max(1);
        let mut acc = 0.0;
        for i in 0..v.len() {
            let sc = tol.abs + tol.rel * y.abs_at(i);
            acc += (v.abs_at(i) / sc).powi(2);
        }
        (acc / n as f64).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(horizon);

    let mut y1 = y.clone();
    y1.axpy(h0, f0);
    let mut f1 = y.zeros_like();
    rhs(&y1, &mut f1);
    stats.rhs_evals += 1;
    let mut diff = f1.clone();
    diff.axpy(-1.0, f0);
    let d2 = scaled(&diff) / h0;

    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::I;

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = vec![1.0, -2.0, 3.0];
        let out = integrate_ode(|_: &Vec<f64>, dy: &mut Vec<f64>| dy.fill(0.0), &y0, &grid(5.0, 6), Tolerances::default()).unwrap();
        assert!(out.iter().all(|y| *y == y0));
    }

    #[test]
    fn exponential_decay() {
        let tol = Tolerances::default();
        let out = integrate_ode(
            |y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = -y[0],
            &vec![1.0],
            &[0.0, 0.5, 1.0],
            tol,
        )
        .unwrap();
        let exact = (-1.0f64).exp();
        assert!(((out[2][0] - exact) / exact).abs() < tol.rel);
        assert!((out[1][0] - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rabi_inversion_two_level() {
        // ẏ = −i[Ωσx, y], Ω = 1: p_excited(t) = sin²(Ωt).
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let rho0 = ComplexMatrix::outer_basis(2, 0, 0);
        let rhs = |y: &ComplexMatrix, dy: &mut ComplexMatrix| {
            let c = sx.commutator(y).unwrap();
            for (d, &v) in dy.as_mut_slice().iter_mut().zip(c.as_slice()) {
                *d = -I * v;
            }
        };
        let t = std::f64::consts::FRAC_PI_2;
        let out = integrate_ode(rhs, &rho0, &[0.0, t / 2.0, t], Tolerances::default()).unwrap();
        assert!((out[2][(1, 1)].re - 1.0).abs() < 1e-8);
        assert!((out[1][(1, 1)].re - 0.5).abs() < 1e-8);
        assert!((out[2].trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_grid_returns_initial() {
        let out = integrate_ode(|y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = y[0], &vec![2.0], &[0.0], Tolerances::default()).unwrap();
        assert_eq!(out, vec![vec![2.0]]);
    }

    #[test]
    fn rejects_bad_grids() {
        let f = |_: &Vec<f64>, dy: &mut Vec<f64>| dy.fill(0.0);
        let y0 = vec![0.0];
        assert!(matches!(integrate_ode(f, &y0, &[], Tolerances::default()), Err(Error::InvalidGrid(_))));
        assert!(matches!(integrate_ode(f, &y0, &[1.0, 2.0], Tolerances::default()), Err(Error::InvalidGrid(_))));
        assert!(matches!(integrate_ode(f, &y0, &[0.0, 2.0, 2.0], Tolerances::default()), Err(Error::InvalidGrid(_))));
        let bad = Tolerances { rel: 0.0, abs: 1e-10 };
        assert!(matches!(integrate_ode(f, &y0, &[0.0, 1.0], bad), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn finite_time_blowup_underflows() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let r = integrate_ode(|y: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = y[0] * y[0], &vec![1.0], &[0.0, 2.0], Tolerances::default());
        match r {
            Err(Error::StepUnderflow { time, .. }) => assert!((time - 1.0).abs() < 1e-2, "time = {time}"),
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn observer_error_aborts() {
        let r = integrate_ode_with(
            |_: &Vec<f64>, dy: &mut Vec<f64>| dy[0] = 1.0,
            &vec![0.0],
            &[0.0, 1.0, 2.0],
            Tolerances::default(),
            |k, _, _| if k == 1 { Err(Error::Internal("stop".into())) } else { Ok(()) },
        );
        assert_eq!(r, Err(Error::Internal("stop".into())));
    }
}
