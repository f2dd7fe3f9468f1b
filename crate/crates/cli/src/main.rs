//! `dglm-ppm`: fit, simulate, compare and forecast from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dglm_ppm::Error;

#[derive(Parser)]
#[command(
    name = "dglm-ppm",
    version,
    about = "Change-point detection with DGLMs inside a product partition model"
)]
struct Cli {
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model and write chain, summary, forecast and state files.
    Fit(FitArgs),
    /// Run the Monte Carlo study on simulated Poisson series with jumps.
    Simulate(SimulateArgs),
    /// Fit several models to one series and rank them by posterior probability.
    Compare(CompareArgs),
    /// One-step-ahead forecasts from a fit or a saved chain.
    Forecast(ForecastArgs),
}

/// Settings shared by every command; each overrides the config file.
#[derive(Args, Clone, Default)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Series CSV path or bundled dataset name (coal).
    #[arg(long, value_name = "SOURCE")]
    pub data: Option<String>,
    /// Beta prior on the change probability as A,B.
    #[arg(long, value_name = "A,B", value_parser = parse_pair)]
    pub pi_prior: Option<[f64; 2]>,
    /// Beta prior on the discount factor as A,B.
    #[arg(long, value_name = "A,B", value_parser = parse_pair)]
    pub delta_prior: Option<[f64; 2]>,
    /// Total sweeps including burn-in.
    #[arg(long, value_name = "N")]
    pub chain: Option<usize>,
    #[arg(long, value_name = "N")]
    pub burnin: Option<usize>,
    #[arg(long, value_name = "N")]
    pub thin: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Independent chains merged into one posterior sample.
    #[arg(long, value_name = "K")]
    pub chains: Option<usize>,
    /// Output directory (else config, else $DGLM_PPM_OUT, else ./dglm-ppm-out).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Fit the conventional DGLM (a break after every observation).
    #[arg(long)]
    pub dglm: bool,
    /// Central mass of the forecast band.
    #[arg(long, default_value_t = 0.95, value_name = "P")]
    pub mass: f64,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Number of replications.
    #[arg(long, value_name = "L")]
    pub replications: Option<usize>,
    /// Series length.
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// One TOML configuration per model; repeat for several.
    #[arg(long = "config", value_name = "FILE")]
    pub configs: Vec<PathBuf>,
    /// Beta priors on the change probability; one model per value.
    #[arg(long = "pi-prior", value_name = "A,B", value_parser = parse_pair)]
    pub pi_priors: Vec<[f64; 2]>,
    /// Add the conventional DGLM to the comparison.
    #[arg(long)]
    pub include_dglm: bool,
    #[arg(long, value_name = "SOURCE")]
    pub data: Option<String>,
    #[arg(long, value_name = "A,B", value_parser = parse_pair)]
    pub delta_prior: Option<[f64; 2]>,
    #[arg(long, value_name = "N")]
    pub chain: Option<usize>,
    #[arg(long, value_name = "N")]
    pub burnin: Option<usize>,
    #[arg(long, value_name = "N")]
    pub thin: Option<usize>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95, value_name = "P")]
    pub mass: f64,
}

#[derive(Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Use a chain written by `fit` instead of running a new one.
    #[arg(long, value_name = "FILE")]
    pub chain_file: Option<PathBuf>,
    #[arg(long)]
    pub dglm: bool,
    #[arg(long, default_value_t = 0.95, value_name = "P")]
    pub mass: f64,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|_| format!("{a:?} is not a number"))?;
            let b: f64 = b.parse().map_err(|_| format!("{b:?} is not a number"))?;
            Ok([a, b])
        }
        _ => Err(format!("expected A,B, got {s:?}")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::UnsupportedFamily(_) | Error::Dimension(_) => 2,
        Error::Data(_) | Error::Support { .. } | Error::InvalidPartition(_) => 3,
        Error::Chain(_) | Error::Arms(_) | Error::DegeneratePrior(_) | Error::InsufficientSamples { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Forecast(a) => commands::forecast(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
