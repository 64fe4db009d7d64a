//! Experiment runner CLI for the POS-SW hybrid beamforming simulator.
//!
//! Each subcommand loads a TOML (or JSON) experiment config, runs the
//! Monte Carlo experiment, and writes a CSV or JSON result table.
//! Identical (config, seed) pairs produce byte-identical output files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use possw_core::harness::{self, ExperimentConfig, ExperimentKind, OutputFormat};
use possw_core::Error;

#[derive(Parser)]
#[command(
    name = "possw",
    version,
    about = "mmWave POS-SW hybrid beamforming experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral efficiency vs SNR for the configured design methods.
    SeSweep(RunArgs),
    /// Energy efficiency vs number of RF chains per architecture.
    EeSweep(RunArgs),
    /// Beam patterns of quantized steering vectors.
    Beampattern(RunArgs),
    /// Compressed-sensing channel estimation quality.
    Estimate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (.toml or .json).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides the config's `format`.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?}, expected csv or json")),
    }
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::SeSweep(_) => ExperimentKind::SeSweep,
            Command::EeSweep(_) => ExperimentKind::EeSweep,
            Command::Beampattern(_) => ExperimentKind::Beampattern,
            Command::Estimate(_) => ExperimentKind::Estimation,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::SeSweep(a)
            | Command::EeSweep(a)
            | Command::Beampattern(a)
            | Command::Estimate(a) => a,
        }
    }
}

fn execute(command: &Command) -> Result<(), Error> {
    let args = command.args();
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if config.experiment != command.kind() {
        return Err(Error::InvalidInput(format!(
            "config declares experiment \"{}\" but the {} subcommand was invoked",
            config.experiment.label(),
            command.kind().label()
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.clone());
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    config.validate()?;

    let table = harness::run(&config)?;
    match &config.output {
        Some(path) => {
            table.write(path, config.format)?;
            eprintln!(
                "{}: wrote {} to {}",
                config.experiment.label(),
                table.summary(),
                path.display()
            );
        }
        None => print!("{}", table.emit(config.format)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
