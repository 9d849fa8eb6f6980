//! Running configured experiments.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use qtbattery::protocol::{charge, saturation_time, ChargeRun, Engine};
use qtbattery::Error;

use crate::config::{engine_name, Experiment};
use crate::error::CliResult;
use crate::output::{num, opt_num, trajectory_csv, write_file};

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub engine: Engine,
    pub coupling: f64,
    /// `ΔE/E_B` at the horizon.
    pub final_delta_e: f64,
    /// `𝓔/E_B` at the horizon.
    pub final_ergotropy: f64,
    /// Saturation time in absolute units, if the threshold was reached.
    pub saturation_time: Option<f64>,
}

impl RunSummary {
    pub const COLUMNS: &'static str = "coupling,final_delta_E_over_EB,final_ergotropy_over_EB,saturation_t,saturation_gamma_eg_t";

    /// Row matching [`RunSummary::COLUMNS`]; the engine is not included.
    pub fn csv_row(&self, gamma_eg: f64) -> String {
        format!(
            "{},{},{},{},{}",
            num(self.coupling),
            num(self.final_delta_e),
            num(self.final_ergotropy),
            opt_num(self.saturation_time),
            opt_num(self.saturation_time.map(|t| t * gamma_eg))
        )
    }
}

pub fn execute(exp: &Experiment, engine: Engine) -> CliResult<ChargeRun> {
    Ok(charge(&exp.battery, &exp.charger, &exp.initial, &exp.plan(engine)?)?)
}

pub fn summarize(exp: &Experiment, engine: Engine, run: &ChargeRun) -> CliResult<RunSummary> {
    let tr = &run.trajectory;
    let e_b = exp.battery.energy_quantum();
    let saturation = match saturation_time(tr, &exp.battery, exp.config.run.saturation_threshold, &run.schedule) {
        Ok(rep) => Some(rep.time),
        Err(Error::ThresholdNotReached { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(RunSummary {
        engine,
        coupling: exp.charger.coupling(),
        final_delta_e: tr.stored_energy().last().copied().unwrap_or(0.0) / e_b,
        final_ergotropy: tr.ergotropy().last().copied().unwrap_or(0.0) / e_b,
        saturation_time: saturation,
    })
}

pub fn trajectory_path(dir: &Path, stem: &str, engine: Engine) -> PathBuf {
    dir.join(format!("{stem}_{}.csv", engine_name(engine)))
}

/// Runs every configured engine concurrently and writes one CSV per engine
/// into `dir` (the configured directory unless overridden).
pub fn run_experiment(exp: &Experiment, dir: Option<&Path>) -> CliResult<Vec<(PathBuf, RunSummary)>> {
    let dir = dir.unwrap_or(&exp.config.output.directory);
    let engines = exp.config.run.engine.engines();
    let results: Vec<CliResult<(Engine, String, RunSummary)>> = engines
        .par_iter()
        .map(|&engine| {
            let run = execute(exp, engine)?;
            let summary = summarize(exp, engine, &run)?;
            Ok((engine, trajectory_csv(exp, engine, &run.trajectory), summary))
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        let (engine, csv, summary) = r?;
        let path = trajectory_path(dir, &exp.config.output.stem, engine);
        write_file(&path, &csv)?;
        out.push((path, summary));
    }
    Ok(out)
}
