//! Command-line front end for `qtbattery`: configuration files, CSV output,
//! sweeps, reference data sets and plots.

pub mod config;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod output;
pub mod plot;
pub mod sweep;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
