use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qtbattery::protocol::Engine;
use qtbattery::validate::{run_validation, ValidationOptions};
use qtbattery_cli::config::engine_name;
use qtbattery_cli::experiment::{run_experiment, RunSummary};
use qtbattery_cli::figures::{reproduce, Figure};
use qtbattery_cli::output::write_file;
use qtbattery_cli::plot::{plot, PlotRequest};
use qtbattery_cli::sweep::{parse_values, sweep, sweep_csv, Axis};
use qtbattery_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qtbattery", version, about = "Charge quantum batteries through a driven dissipative qutrit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Full,
    Effective,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a configuration file and write one CSV per engine.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Repeat a configuration over values of one parameter.
    Sweep {
        config: PathBuf,
        /// Parameter to vary: g, Omega, beta, tau or n_opt.
        #[arg(long)]
        axis: String,
        /// Comma-separated values (beta accepts `inf`).
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Engine to use when the configuration selects both.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// Summary CSV path (default: <directory>/<stem>_sweep_<axis>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data set for one reference figure.
    Reproduce {
        /// fig2 … fig9
        figure: String,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
        /// Skip full master-equation runs.
        #[arg(long)]
        effective_only: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the numerical self-check battery.
    Validate {
        #[arg(long, default_value_t = ValidationOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = ValidationOptions::default().parameter_draws)]
        draws: usize,
    },
    /// Plot one column against another from CSV files as SVG.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value = "gamma_eg_t")]
        x: String,
        #[arg(long, default_value = "ergotropy_over_EB")]
        y: String,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let exp = cfg.resolve()?;
            let results = run_experiment(&exp, out_dir.as_deref())?;
            println!("engine,{}", RunSummary::COLUMNS);
            for (path, summary) in results {
                println!("{},{}", engine_name(summary.engine), summary.csv_row(exp.charger.rates().eg));
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Sweep { config, axis, values, engine, workers, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let axis: Axis = axis.parse()?;
            let values = parse_values(axis, &values)?;
            let engine = match (engine, cfg.run.engine.engines().as_slice()) {
                (Some(EngineArg::Full), _) => Engine::Full,
                (Some(EngineArg::Effective), _) => Engine::Effective,
                (None, [only]) => *only,
                (None, _) => return Err(CliError::config("run.engine: a sweep needs a single engine; pass --engine")),
            };
            let rows = sweep(&cfg, axis, &values, engine, workers.unwrap_or_else(default_workers))?;
            let path = out.unwrap_or_else(|| cfg.output.directory.join(format!("{}_sweep_{axis}.csv", cfg.output.stem)));
            write_file(&path, &sweep_csv(&cfg, axis, engine, &rows))?;
            eprintln!("wrote {}", path.display());
        }
        Command::Reproduce { figure, out_dir, effective_only, workers } => {
            let figure: Figure = figure.parse()?;
            for p in reproduce(figure, &out_dir, effective_only, workers.unwrap_or_else(default_workers))? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Validate { seed, draws } => {
            let report = run_validation(ValidationOptions { seed, parameter_draws: draws })?;
            println!("name,measured,bound,pass");
            for check in &report.checks {
                println!("{check}");
            }
            if !report.all_passed() {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
                return Err(CliError::Validation(failed.join(", ")));
            }
        }
        Command::Plot { inputs, out, x, y } => plot(&PlotRequest { inputs, output: out, x, y })?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtbattery: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
