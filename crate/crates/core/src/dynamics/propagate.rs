use crate::error::{Error, Result};
use crate::numerics::tolerances::{STATE_POSITIVITY_TOL, STATE_TRACE_TOL};
use crate::numerics::{integrate_ode_with, ComplexMatrix, IntegrationStats, Tolerances};

use super::generator::LindbladGenerator;
use super::state::DensityMatrix;

/// Recorded states: full density matrices, or level populations when the
/// evolution provably stays diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum StateRecord {
    Dense(Vec<DensityMatrix>),
    Diagonal(Vec<Vec<f64>>),
}

impl StateRecord {
    pub fn len(&self) -> usize {
        match self {
            StateRecord::Dense(v) => v.len(),
            StateRecord::Diagonal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn populations(&self, i: usize) -> Vec<f64> {
        match self {
            StateRecord::Dense(v) => v[i].populations(),
            StateRecord::Diagonal(v) => v[i].clone(),
        }
    }

    pub fn state(&self, i: usize) -> DensityMatrix {
        match self {
            StateRecord::Dense(v) => v[i].clone(),
            StateRecord::Diagonal(v) => DensityMatrix::from_populations(&v[i]).expect("recorded populations were validated"),
        }
    }

    fn into_dense(self) -> Vec<DensityMatrix> {
        match self {
            StateRecord::Dense(v) => v,
            StateRecord::Diagonal(v) => v
                .iter()
                .map(|p| DensityMatrix::from_populations(p).expect("recorded populations were validated"))
                .collect(),
        }
    }
}

/// States on a time grid, before any observables are derived.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub times: Vec<f64>,
    pub states: StateRecord,
    /// `Tr[(|g⟩⟨g| ⊗ I)ρ]` at each time, for composite runs.
    pub qutrit_ground: Option<Vec<f64>>,
    pub stats: IntegrationStats,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> DensityMatrix {
        self.states.state(self.states.len() - 1)
    }

    /// Appends a series that starts where this one ends, shifting its
    /// times by `offset` and dropping its first (duplicate) sample.
    pub fn extend_shifted(&mut self, next: StateSeries, offset: f64) {
        let StateSeries { times, states, qutrit_ground, stats } = next;
        self.times.extend(times.iter().skip(1).map(|t| t + offset));
        let old = std::mem::replace(&mut self.states, StateRecord::Diagonal(Vec::new()));
        self.states = match (old, states) {
            (StateRecord::Diagonal(mut a), StateRecord::Diagonal(b)) => {
                a.extend(b.into_iter().skip(1));
                StateRecord::Diagonal(a)
            }
            (a, b) => {
                let mut a = a.into_dense();
                a.extend(b.into_dense().into_iter().skip(1));
                StateRecord::Dense(a)
            }
        };
        self.qutrit_ground = match (self.qutrit_ground.take(), qutrit_ground) {
            (Some(mut a), Some(b)) => {
                a.extend(b.into_iter().skip(1));
                Some(a)
            }
            _ => None,
        };
        self.stats.accepted += stats.accepted;
        self.stats.rejected += stats.rejected;
        self.stats.rhs_evals += stats.rhs_evals;
    }

    /// Keeps only the samples whose index satisfies `keep`.
    pub fn retain_indices(&mut self, keep: impl Fn(usize) -> bool) {
        fn filt<T>(v: Vec<T>, keep: &impl Fn(usize) -> bool) -> Vec<T> {
            v.into_iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, x)| x).collect()
        }
        self.times = filt(std::mem::take(&mut self.times), &keep);
        self.states = match std::mem::replace(&mut self.states, StateRecord::Diagonal(Vec::new())) {
            StateRecord::Dense(v) => StateRecord::Dense(filt(v, &keep)),
            StateRecord::Diagonal(v) => StateRecord::Diagonal(filt(v, &keep)),
        };
        self.qutrit_ground = self.qutrit_ground.take().map(|v| filt(v, &keep));
    }
}

fn check_dims(gen: &LindbladGenerator, rho0: &DensityMatrix) -> Result<()> {
    if gen.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: format!("dimension {}", gen.dim()), found: rho0.dim().to_string() });
    }
    Ok(())
}

fn at_time(t: f64, e: Error) -> Error {
    match e {
        Error::InvalidState(msg) => Error::InvalidState(format!("at t = {t:.6e}: {msg}")),
        other => other,
    }
}

fn check_populations(p: &[f64]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STATE_TRACE_TOL {
        return Err(Error::InvalidState(format!("populations sum to {total}")));
    }
    if let Some((n, &x)) = p.iter().enumerate().find(|(_, &x)| x < -STATE_POSITIVITY_TOL) {
        return Err(Error::InvalidState(format!("population of level {n} is {x:.3e}")));
    }
    Ok(())
}

/// Evolves `rho0` under `gen` and records the state at every grid time.
///
/// Diagonal initial states under a generator with [population
/// rates](LindbladGenerator::population_rates) are evolved as population
/// vectors. Every recorded state is validated; a violation aborts the run.
pub fn propagate(gen: &LindbladGenerator, rho0: &DensityMatrix, t_grid: &[f64], tol: Tolerances) -> Result<StateSeries> {
    check_dims(gen, rho0)?;
    if rho0.is_diagonal() {
        if let Some(rates) = gen.population_rates() {
            let mut out = Vec::with_capacity(t_grid.len());
            let stats = integrate_ode_with(
                |p: &Vec<f64>, dp: &mut Vec<f64>| rates.apply(p, dp),
                &rho0.populations(),
                t_grid,
                tol,
                |_, t, p| {
                    check_populations(p).map_err(|e| at_time(t, e))?;
                    out.push(p.clone());
                    Ok(())
                },
            )?;
            return Ok(StateSeries { times: t_grid.to_vec(), states: StateRecord::Diagonal(out), qutrit_ground: None, stats });
        }
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let stats = integrate_ode_with(
        |x: &ComplexMatrix, y: &mut ComplexMatrix| gen.apply_hermitian(x, y),
        rho0.matrix(),
        t_grid,
        tol,
        |_, t, m| {
            out.push(DensityMatrix::new(m.clone()).map_err(|e| at_time(t, e))?);
            Ok(())
        },
    )?;
    Ok(StateSeries { times: t_grid.to_vec(), states: StateRecord::Dense(out), qutrit_ground: None, stats })
}

/// Result of a composite (charger ⊗ battery) run.
#[derive(Debug, Clone)]
pub struct CompositeRun {
    /// Reduced battery states and charger ground population.
    pub series: StateSeries,
    /// Full composite state at the last grid time.
    pub final_state: DensityMatrix,
}

/// Evolves a composite state, keeping only the reduced battery state and the
/// charger ground population at each grid time. The composite state is
/// validated at every grid time.
pub fn propagate_composite(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    battery_dim: usize,
    t_grid: &[f64],
    tol: Tolerances,
) -> Result<CompositeRun> {
    check_dims(gen, rho0)?;
    let mut reduced = Vec::with_capacity(t_grid.len());
    let mut ground = Vec::with_capacity(t_grid.len());
    let mut last = rho0.clone();
    let stats = integrate_ode_with(
        |x: &ComplexMatrix, y: &mut ComplexMatrix| gen.apply_hermitian(x, y),
        rho0.matrix(),
        t_grid,
        tol,
        |_, t, m| {
            let state = DensityMatrix::new(m.clone()).map_err(|e| at_time(t, e))?;
            reduced.push(state.partial_trace_leading(battery_dim).map_err(|e| at_time(t, e))?);
            ground.push(state.leading_population(battery_dim, 0));
            last = state;
            Ok(())
        },
    )?;
    Ok(CompositeRun {
        series: StateSeries {
            times: t_grid.to_vec(),
            states: StateRecord::Dense(reduced),
            qutrit_ground: Some(ground),
            stats,
        },
        final_state: last,
    })
}

/// `n` uniformly spaced times from 0 to `horizon` inclusive (a single 0 when
/// `horizon` is 0).
pub fn uniform_grid(horizon: f64, n: usize) -> Result<Vec<f64>> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidGrid(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    if horizon == 0.0 {
        return Ok(vec![0.0]);
    }
    if n < 2 {
        return Err(Error::InvalidGrid("a positive horizon needs at least two grid points".into()));
    }
    Ok((0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect())
}
