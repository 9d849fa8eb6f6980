//! One-parameter sweeps over a configuration template.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use qtbattery::protocol::Engine;

use crate::config::{engine_name, parse_beta, Coupling, ExperimentConfig, InitialState};
use crate::error::{CliError, CliResult};
use crate::experiment::{execute, summarize, RunSummary};
use crate::output::{header, num};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Fixed coupling `g`.
    Coupling,
    /// Drive amplitude `Ω`.
    Drive,
    /// Initial inverse temperature `β`.
    Beta,
    /// Single quench time, in units of `1/γ_eg`.
    Tau,
    /// Level whose optimal coupling is used.
    OptimalLevel,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "g" => Ok(Axis::Coupling),
            "Omega" | "omega" => Ok(Axis::Drive),
            "beta" => Ok(Axis::Beta),
            "tau" => Ok(Axis::Tau),
            "n_opt" => Ok(Axis::OptimalLevel),
            other => Err(CliError::config(format!("--axis: unknown axis {other:?}; expected one of g, Omega, beta, tau, n_opt"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Coupling => "g",
            Axis::Drive => "Omega",
            Axis::Beta => "beta",
            Axis::Tau => "tau",
            Axis::OptimalLevel => "n_opt",
        })
    }
}

/// Parses a comma-separated value list for `axis`.
pub fn parse_values(axis: Axis, list: &str) -> CliResult<Vec<f64>> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match axis {
            Axis::Beta => parse_beta(s),
            Axis::OptimalLevel => s.parse::<usize>().map(|n| n as f64).map_err(|_| format!("level index {s:?} is not a nonnegative integer")),
            _ => s.parse::<f64>().map_err(|_| format!("bad number {s:?}")),
        })
        .collect::<Result<_, _>>()
        .map_err(|m| CliError::config(format!("--values: {m}")))?;
    if values.is_empty() {
        return Err(CliError::config("--values: empty list"));
    }
    Ok(values)
}

/// The template with `axis` set to `value`.
pub fn apply(template: &ExperimentConfig, axis: Axis, value: f64) -> ExperimentConfig {
    let mut cfg = template.clone();
    match axis {
        Axis::Coupling => cfg.charger.coupling = Coupling::Fixed(value),
        Axis::Drive => cfg.charger.drive = value,
        Axis::Beta => cfg.initial.state = InitialState::Thermal(value),
        Axis::Tau => cfg.run.quench_times = vec![value],
        Axis::OptimalLevel => cfg.charger.coupling = Coupling::OptimalLevel(value as usize),
    }
    cfg
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub summary: RunSummary,
}

/// Runs one experiment per value on `workers` threads; rows come back in
/// input order. Every derived configuration is validated before any run.
pub fn sweep(template: &ExperimentConfig, axis: Axis, values: &[f64], engine: Engine, workers: usize) -> CliResult<Vec<SweepRow>> {
    let experiments = values
        .iter()
        .map(|&v| apply(template, axis, v).resolve().map_err(|e| CliError::config(format!("{axis} = {v}: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| CliError::runtime(e.to_string()))?;
    pool.install(|| {
        experiments
            .par_iter()
            .zip(values.par_iter())
            .map(|(exp, &value)| {
                let run = execute(exp, engine)?;
                Ok(SweepRow { value, summary: summarize(exp, engine, &run)? })
            })
            .collect()
    })
}

pub fn sweep_csv(template: &ExperimentConfig, axis: Axis, engine: Engine, rows: &[SweepRow]) -> String {
    let extra = [("sweep_axis", axis.to_string()), ("engine", engine_name(engine).to_string())];
    let mut s = header("sweep", template, &extra);
    s.push_str(&format!("{axis},{}\n", RunSummary::COLUMNS));
    let eg = template.charger.gamma_eg;
    for r in rows {
        s.push_str(&format!("{},{}\n", num(r.value), r.summary.csv_row(eg)));
    }
    s
}
