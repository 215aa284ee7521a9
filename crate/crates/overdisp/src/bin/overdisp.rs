//! Command-line front end for the overdispersed infinite-server toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use overdisp::cli::{
    self, cmd_approximate, cmd_constants, cmd_simulate, cmd_table, parse_config, Format, Report,
    RunConfig, SimulateOverrides,
};
use overdisp::Error;

#[derive(Parser)]
#[command(
    name = "overdisp",
    about = "Tail asymptotics and rare-event simulation for infinite-server systems \
             with overdispersed (gamma-subordinated) input",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the flat key-value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output encoding; overrides output.format from the config.
    #[arg(long)]
    format: Option<String>,
    /// Decimal digits in CSV output (round-half-even).
    #[arg(long, default_value_t = 3)]
    precision: usize,
    /// RNG seed override for simulation.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// All regime constants of the configured model.
    Constants(Common),
    /// Tail-probability approximation with its term breakdown.
    Approximate(Common),
    /// Monte Carlo estimate next to the analytic approximation.
    Simulate(Common),
    /// Regenerate a reference table (1/3: constants, 2/4: tail values).
    Table {
        /// Table id in 1..=4.
        #[arg(long)]
        table: u8,
        #[arg(long)]
        format: Option<String>,
        #[arg(long, default_value_t = 3)]
        precision: usize,
    },
}

fn load(common: &Common) -> Result<(RunConfig, Format), Error> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", common.config.display()))
    })?;
    let cfg = parse_config(&text)?;
    let format = match &common.format {
        Some(raw) => raw.parse()?,
        None => cfg.format,
    };
    Ok((cfg, format))
}

fn emit(report: Report) -> Result<(), Error> {
    match report.path {
        Some(path) => std::fs::write(&path, report.text)
            .map_err(|e| Error::Config(format!("cannot write output {path}: {e}"))),
        None => {
            print!("{}", report.text);
            Ok(())
        }
    }
}

fn threads_override() -> Result<Option<u32>, Error> {
    match std::env::var(cli::THREADS_ENV) {
        Ok(raw) => raw
            .parse::<u32>()
            .map(Some)
            .map_err(|_| Error::Config(format!("{}: not an integer: {raw:?}", cli::THREADS_ENV))),
        Err(_) => Ok(None),
    }
}

fn run() -> Result<(), Error> {
    match CliArgs::parse().command {
        Command::Constants(common) => {
            let (cfg, format) = load(&common)?;
            emit(cmd_constants(&cfg, format, common.precision)?)
        }
        Command::Approximate(common) => {
            let (cfg, format) = load(&common)?;
            emit(cmd_approximate(&cfg, format, common.precision)?)
        }
        Command::Simulate(common) => {
            let (cfg, format) = load(&common)?;
            let overrides = SimulateOverrides { seed: common.seed, workers: threads_override()? };
            emit(cmd_simulate(&cfg, format, common.precision, overrides)?)
        }
        Command::Table { table, format, precision } => {
            let format = match format {
                Some(raw) => raw.parse()?,
                None => Format::Csv,
            };
            emit(cmd_table(table, format, precision)?)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
