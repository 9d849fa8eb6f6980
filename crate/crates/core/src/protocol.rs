//! Optimal couplings, effective rates, coupling quenches and saturation
//! times.

use crate::dynamics::{
    effective_battery_generator, propagate, propagate_composite, subspace_denominator, DensityMatrix, LindbladGenerator,
    StateSeries, Trajectory,
};
use crate::error::{Error, Result};
use crate::model::{composite_hamiltonian, jump_operators, BatteryKind, BatteryModel, ChargerParams};
use crate::numerics::Tolerances;
use crate::observables::energy;

fn check_transition(b: &BatteryModel, n: usize) -> Result<f64> {
    if n + 1 >= b.dim() {
        return Err(Error::InvalidParameter { name: "n", reason: format!("level {n} has no upward transition (top is {})", b.top_level()) });
    }
    Ok(b.ladder_coeff(n))
}

/// Effective rate of `|gn⟩ → |g(n+1)⟩`:
/// `γ_eg·Ω²·g²A_n² / |g²A_n² − Δ̃δ̃|²`.
pub fn gamma_eff(b: &BatteryModel, c: &ChargerParams, n: usize) -> Result<f64> {
    let a = check_transition(b, n)?;
    let den = subspace_denominator(c, a, n)?;
    let ga2 = (c.coupling() * a).powi(2);
    Ok(c.rates().eg * c.drive().powi(2) * ga2 / den.norm_sqr())
}

/// Coupling maximizing [`gamma_eff`] for level `n`: `√|Δ̃δ̃| / A_n`.
pub fn optimal_coupling(b: &BatteryModel, c: &ChargerParams, n: usize) -> Result<f64> {
    let a = check_transition(b, n)?;
    Ok(c.detuning_product().norm().sqrt() / a)
}

/// Rate at the optimal coupling, `γ_eg·Ω² / (4|Δ̃δ̃| sin²(φ/2))`, the same
/// for every level.
pub fn optimized_rate_uniform(c: &ChargerParams) -> Result<f64> {
    let dd = c.detuning_product().norm();
    let s = (c.phase() / 2.0).sin().powi(2);
    if dd == 0.0 || s == 0.0 {
        return Err(Error::InvalidParameter { name: "phi", reason: "arg(Δ̃δ̃) = 0 makes the optimum singular".into() });
    }
    Ok(c.rates().eg * c.drive().powi(2) / (4.0 * dd * s))
}

/// `gamma_eff` for each coupling (rows) and each level with an upward
/// transition (columns).
pub fn rate_landscape(b: &BatteryModel, c: &ChargerParams, couplings: &[f64]) -> Result<Vec<Vec<f64>>> {
    couplings
        .iter()
        .map(|&g| {
            let cg = c.with_coupling(g)?;
            (0..b.top_level()).map(|n| gamma_eff(b, &cg, n)).collect()
        })
        .collect()
}

/// Piecewise-constant coupling: `(start_time, g)` with strictly increasing
/// starts beginning at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSchedule {
    segments: Vec<(f64, f64)>,
}

impl QuenchSchedule {
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |reason: String| Err(Error::InvalidParameter { name: "schedule", reason });
        match segments.first() {
            None => return bad("needs at least one segment".into()),
            Some(&(t, _)) if t != 0.0 => return bad(format!("first segment starts at {t}, not 0")),
            _ => {}
        }
        if let Some(w) = segments.windows(2).find(|w| !(w[1].0 > w[0].0)) {
            return bad(format!("start times {} and {} are not increasing", w[0].0, w[1].0));
        }
        if let Some(&(_, g)) = segments.iter().find(|&&(_, g)| !(g.is_finite() && g > 0.0)) {
            return bad(format!("coupling {g} is not positive"));
        }
        Ok(Self { segments })
    }

    pub fn constant(g: f64) -> Result<Self> {
        Self::new(vec![(0.0, g)])
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Start times of all segments after the first.
    pub fn quench_times(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.0).collect()
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        self.segments.iter().rev().find(|s| s.0 <= t).unwrap_or(&self.segments[0]).1
    }
}

/// Re-optimized coupling for an oscillator battery with mean excitation
/// `n̄`: `√(|Δ̃δ̃| / (n̄ + 1))`.
pub fn quench_coupling_ho(c: &ChargerParams, mean_excitation: f64) -> Result<f64> {
    if !(mean_excitation >= 0.0) {
        return Err(Error::Internal(format!("mean excitation {mean_excitation} is negative")));
    }
    Ok((c.detuning_product().norm() / (mean_excitation + 1.0)).sqrt())
}

/// Which master equation drives a charging run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Charger ⊗ battery, starting with the charger in `|g⟩`.
    Full,
    /// Battery-only effective generator.
    Effective,
}

/// Everything a charging run needs besides the physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargePlan {
    pub engine: Engine,
    /// Output times, starting at 0.
    pub t_grid: Vec<f64>,
    /// Coupling quench times. Non-empty only for oscillator batteries.
    pub quench_times: Vec<f64>,
    pub tolerances: Tolerances,
}

/// A completed charging run.
#[derive(Debug, Clone)]
pub struct ChargeRun {
    pub trajectory: Trajectory,
    pub schedule: QuenchSchedule,
}

fn full_generator(b: &BatteryModel, c: &ChargerParams) -> Result<LindbladGenerator> {
    LindbladGenerator::new(composite_hamiltonian(b, c), jump_operators(b, c))
}

/// Charges `b` from `rho0` with the charger `c`.
///
/// Without quench times the coupling of `c` is used throughout. With quench
/// times (oscillator batteries only) the run starts at `g_{0,opt}` and at
/// each quench time switches to [`quench_coupling_ho`] of the current mean
/// excitation. Quench times at or beyond the horizon are ignored.
pub fn charge(b: &BatteryModel, c: &ChargerParams, rho0: &DensityMatrix, plan: &ChargePlan) -> Result<ChargeRun> {
    let grid = &plan.t_grid;
    let horizon = *grid.last().ok_or_else(|| Error::InvalidGrid("empty grid".into()))?;
    let quenches: Vec<f64> = plan.quench_times.iter().copied().filter(|&t| t < horizon).collect();
    if !plan.quench_times.is_empty() {
        if b.kind() != BatteryKind::TruncatedHO {
            return Err(Error::InvalidParameter { name: "quench_times", reason: "coupling quenches are defined for the oscillator battery only".into() });
        }
        if let Some(&t) = plan.quench_times.iter().find(|&&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::InvalidParameter { name: "quench_times", reason: format!("quench time {t} is not positive") });
        }
        if plan.quench_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter { name: "quench_times", reason: "quench times must increase".into() });
        }
    }
    let mut charger = if plan.quench_times.is_empty() { *c } else { c.with_coupling(optimal_coupling(b, c, 0)?)? };

    // Merge the quench boundaries into the output grid, remembering which
    // samples belong to the output.
    let snap = 1e-12 * horizon.max(1.0);
    let mut times: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    for &q in &quenches {
        if !grid.iter().any(|&t| (t - q).abs() <= snap) {
            times.push((q, false));
        }
    }
    times.sort_by(|a, b| a.0.total_cmp(&b.0));
    let boundary_index = |q: f64| times.iter().position(|&(t, _)| (t - q).abs() <= snap).expect("boundary was merged");

    let mut segments = vec![(0.0, charger.coupling())];
    let mut starts = vec![0usize];
    starts.extend(quenches.iter().map(|&q| boundary_index(q)));
    starts.push(times.len() - 1);

    let mut series: Option<StateSeries> = None;
    let mut battery_state = rho0.clone();
    let mut composite_state = match plan.engine {
        Engine::Full => Some(DensityMatrix::product(&DensityMatrix::pure_level(3, 0)?, rho0)),
        Engine::Effective => None,
    };
    for k in 0..starts.len() - 1 {
        let (i0, i1) = (starts[k], starts[k + 1]);
        let t0 = times[i0].0;
        let local: Vec<f64> = times[i0..=i1].iter().map(|&(t, _)| t - t0).collect();
        let part = match plan.engine {
            Engine::Full => {
                let gen = full_generator(b, &charger)?;
                let run = propagate_composite(&gen, composite_state.as_ref().expect("full run"), b.dim(), &local, plan.tolerances)?;
                composite_state = Some(run.final_state);
                run.series
            }
            Engine::Effective => {
                let gen = effective_battery_generator(b, &charger)?;
                propagate(&gen, &battery_state, &local, plan.tolerances)?
            }
        };
        battery_state = part.last_state();
        match series.as_mut() {
            None => series = Some(part),
            Some(s) => s.extend_shifted(part, t0),
        }
        if k + 1 < starts.len() - 1 {
            let n_bar = energy(&battery_state, b)? / b.energy_quantum();
            let n_bar = if n_bar > -1e-12 { n_bar.max(0.0) } else { n_bar };
            let g = quench_coupling_ho(&charger, n_bar)?;
            charger = charger.with_coupling(g)?;
            segments.push((times[i1].0, g));
        }
    }
    let mut series = series.expect("at least one segment");
    let keep: Vec<bool> = times.iter().map(|&(_, on_grid)| on_grid).collect();
    series.retain_indices(|i| keep[i]);
    Ok(ChargeRun { trajectory: Trajectory::from_series(series, b)?, schedule: QuenchSchedule::new(segments)? })
}

/// When the ergotropy first reaches a fraction of its maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    /// Absolute saturation time `T`.
    pub time: f64,
    pub threshold_fraction: f64,
    /// Ergotropy level that defines saturation.
    pub threshold: f64,
    pub quench_times: Vec<f64>,
    /// Saturation happened before the last quench.
    pub pre_quench: bool,
}

/// First time with `𝓔(t) ≥ threshold_fraction·𝓔_max`, linearly interpolated
/// between grid samples.
pub fn saturation_time(traj: &Trajectory, b: &BatteryModel, threshold_fraction: f64, schedule: &QuenchSchedule) -> Result<SaturationReport> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidParameter { name: "threshold_fraction", reason: format!("must lie in (0, 1), got {threshold_fraction}") });
    }
    let threshold = threshold_fraction * b.max_ergotropy();
    let time = traj.ergotropy_crossing_time(threshold).ok_or_else(|| Error::ThresholdNotReached {
        threshold,
        last: traj.ergotropy().last().copied().unwrap_or(0.0),
    })?;
    let quench_times = schedule.quench_times();
    let pre_quench = quench_times.last().is_some_and(|&q| time < q);
    Ok(SaturationReport { time, threshold_fraction, threshold, quench_times, pre_quench })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::uniform_grid;
    use crate::presets::reference_charger;

    fn fig2() -> ChargerParams {
        reference_charger(1.0, 0.05, false).unwrap()
    }

    #[test]
    fn optimal_coupling_values() {
        let c = fig2();
        let uni = BatteryModel::uniform_ladder(50, 1.0).unwrap();
        assert!((optimal_coupling(&uni, &c, 0).unwrap() - 0.035355339).abs() < 1e-8);
        assert!(optimal_coupling(&uni, &c, 50).is_err());
        let spin = BatteryModel::large_spin(50, 1.0).unwrap();
        let m0 = spin.level_of_m(0.0).unwrap();
        let expected = (c.detuning_product().norm() / 650.0).sqrt();
        assert!((optimal_coupling(&spin, &c, m0).unwrap() - expected).abs() < 1e-15);
        let ho = BatteryModel::truncated_ho(50, 1.0).unwrap();
        let g0 = optimal_coupling(&ho, &c, 0).unwrap();
        for n in 0..50 {
            let gn = optimal_coupling(&ho, &c, n).unwrap();
            assert!((gn / g0 - 1.0 / ((n + 1) as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn optimized_rate_values() {
        let c = fig2();
        let r = optimized_rate_uniform(&c).unwrap();
        assert!((r - 2.5e-4).abs() < 1e-15);
        let uni = BatteryModel::uniform_ladder(3, 1.0).unwrap();
        let at_opt = c.with_coupling(optimal_coupling(&uni, &c, 0).unwrap()).unwrap();
        assert!((gamma_eff(&uni, &at_opt, 1).unwrap() - r).abs() <= 1e-12 * r);
        let doubled = c.with_drive(2.0 * c.drive()).unwrap();
        assert!((optimized_rate_uniform(&doubled).unwrap() / r - 4.0).abs() < 1e-12);
        let lossless = ChargerParams::new(0.1, 0.01, 0.005, Default::default(), 0.0).unwrap();
        assert!(optimized_rate_uniform(&lossless).is_err());
    }

    #[test]
    fn optimum_matches_golden_section() {
        let c = fig2();
        let uni = BatteryModel::uniform_ladder(2, 1.0).unwrap();
        let f = |g: f64| gamma_eff(&uni, &c.with_coupling(g).unwrap(), 0).unwrap();
        let (mut a, mut b) = (1e-4, 1.0);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = b - phi * (b - a);
            let x2 = a + phi * (b - a);
            if f(x1) < f(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let best = f(0.5 * (a + b));
        assert!((best - optimized_rate_uniform(&c).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gamma_eff_zero_without_coupling() {
        let uni = BatteryModel::uniform_ladder(3, 1.0).unwrap();
        assert_eq!(gamma_eff(&uni, &fig2(), 0).unwrap(), 0.0);
        assert!(gamma_eff(&uni, &fig2(), 3).is_err());
    }

    #[test]
    fn landscape_shape() {
        let spin = BatteryModel::large_spin(10, 1.0).unwrap();
        let rows = rate_landscape(&spin, &fig2(), &[0.001, 0.01, 0.1]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.len() == 10));
    }

    #[test]
    fn schedule_validation() {
        assert!(QuenchSchedule::new(vec![]).is_err());
        assert!(QuenchSchedule::new(vec![(1.0, 0.1)]).is_err());
        assert!(QuenchSchedule::new(vec![(0.0, 0.1), (0.0, 0.2)]).is_err());
        assert!(QuenchSchedule::new(vec![(0.0, 0.0)]).is_err());
        let s = QuenchSchedule::new(vec![(0.0, 0.1), (5.0, 0.05)]).unwrap();
        assert_eq!(s.coupling_at(4.9), 0.1);
        assert_eq!(s.coupling_at(5.0), 0.05);
        assert_eq!(s.quench_times(), vec![5.0]);
    }

    #[test]
    fn quench_fixed_point_and_guard() {
        let c = fig2();
        let ho = BatteryModel::truncated_ho(5, 1.0).unwrap();
        assert_eq!(quench_coupling_ho(&c, 0.0).unwrap(), optimal_coupling(&ho, &c, 0).unwrap());
        assert!(matches!(quench_coupling_ho(&c, -0.5), Err(Error::Internal(_))));
    }

    #[test]
    fn no_quench_is_single_segment() {
        let ho = BatteryModel::truncated_ho(5, 1.0).unwrap();
        let c = reference_charger(1.0, 0.1, true).unwrap();
        let c = c.with_coupling(optimal_coupling(&ho, &c, 0).unwrap()).unwrap();
        let plan = ChargePlan {
            engine: Engine::Effective,
            t_grid: uniform_grid(1000.0, 11).unwrap(),
            quench_times: vec![],
            tolerances: Tolerances::default(),
        };
        let run = charge(&ho, &c, &DensityMatrix::pure_level(6, 0).unwrap(), &plan).unwrap();
        assert_eq!(run.schedule.segments(), &[(0.0, c.coupling())]);
        assert_eq!(run.trajectory.len(), 11);
    }

    #[test]
    fn quench_off_grid_is_not_recorded() {
        let ho = BatteryModel::truncated_ho(5, 1.0).unwrap();
        let c = reference_charger(1.0, 0.1, true).unwrap();
        let plan = ChargePlan {
            engine: Engine::Effective,
            t_grid: uniform_grid(1000.0, 11).unwrap(),
            quench_times: vec![250.0, 5000.0],
            tolerances: Tolerances::default(),
        };
        let run = charge(&ho, &c, &DensityMatrix::pure_level(6, 0).unwrap(), &plan).unwrap();
        assert_eq!(run.trajectory.times(), plan.t_grid.as_slice());
        assert_eq!(run.schedule.quench_times(), vec![250.0]);
        assert!(run.schedule.segments()[1].1 < run.schedule.segments()[0].1);

        let uni = BatteryModel::uniform_ladder(5, 1.0).unwrap();
        assert!(charge(&uni, &c, &DensityMatrix::pure_level(6, 0).unwrap(), &plan).is_err());
    }

    #[test]
    fn saturation_examples() {
        let uni = BatteryModel::uniform_ladder(1, 1.0).unwrap();
        let c = fig2();
        let c = c.with_coupling(optimal_coupling(&uni, &c, 0).unwrap()).unwrap();
        let plan = ChargePlan {
            engine: Engine::Effective,
            t_grid: uniform_grid(40000.0, 201).unwrap(),
            quench_times: vec![],
            tolerances: Tolerances::default(),
        };
        let top = DensityMatrix::pure_level(2, 1).unwrap();
        let sched = QuenchSchedule::constant(c.coupling()).unwrap();
        let run = charge(&uni, &c, &top, &plan).unwrap();
        assert_eq!(saturation_time(&run.trajectory, &uni, 0.99, &sched).unwrap().time, 0.0);

        let run = charge(&uni, &c, &DensityMatrix::pure_level(2, 0).unwrap(), &plan).unwrap();
        let rep = saturation_time(&run.trajectory, &uni, 0.9, &sched).unwrap();
        // Two levels, rate γ: 𝓔 = 1 − 2e^{−γt} reaches 0.9 at γt = ln 20.
        assert!((rep.time * 2.5e-4 - 20f64.ln()).abs() < 1e-3);
        assert!(saturation_time(&run.trajectory, &uni, 1.0, &sched).is_err());
        let short = ChargePlan { t_grid: uniform_grid(100.0, 3).unwrap(), ..plan };
        let run = charge(&uni, &c, &DensityMatrix::pure_level(2, 0).unwrap(), &short).unwrap();
        assert!(matches!(saturation_time(&run.trajectory, &uni, 0.5, &sched), Err(Error::ThresholdNotReached { .. })));
    }
}
