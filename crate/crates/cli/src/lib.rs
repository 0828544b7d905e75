//! Command-line front end: configuration parsing, sweeps and CSV output.

pub mod commands;
pub mod config;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, CliError, Command, Outcome, Status};
pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "revivals", version, about = "Classical periods and revival times of driven power-law wells")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Semiclassical against finite-difference energy levels.
    Spectrum(Common),
    /// Mathieu characteristic values over a (nu, q) grid.
    Mathieu(Common),
    /// Driven and undriven time scales, one row per sweep point.
    Times(Common),
    /// Autocorrelation of a propagated wave packet.
    Simulate(Common),
    /// Predicted against simulated periods and revival times.
    Verify(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Recorded in the output header.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Sub {
    fn split(&self) -> (Command, &Common) {
        match self {
            Sub::Spectrum(c) => (Command::Spectrum, c),
            Sub::Mathieu(c) => (Command::Mathieu, c),
            Sub::Times(c) => (Command::Times, c),
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::Verify(c) => (Command::Verify, c),
        }
    }
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("revivals: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<Status, CliError> {
    let (cmd, common) = cli.command.split();
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        CliError::Config(ConfigError {
            line: None,
            key: common.config.display().to_string(),
            message: format!("cannot read: {e}"),
        })
    })?;
    let config = RunConfig::parse(&text)?;
    let version = env!("CARGO_PKG_VERSION");
    let outcome = match common.threads {
        Some(0) => {
            return Err(CliError::Config(ConfigError {
                line: None,
                key: "--threads".into(),
                message: "must be >= 1".into(),
            }))
        }
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numeric(e.to_string()))?
            .install(|| execute(cmd, &config, version, common.seed))?,
        None => execute(cmd, &config, version, common.seed)?,
    };

    let path = common.out.clone().or_else(|| config.str_opt("output.path").map(PathBuf::from));
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).map_err(CliError::Io)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    outcome.table.write_to(&mut out).map_err(CliError::Io)?;
    match outcome.status {
        Status::Ok => {}
        Status::NumericFailed => eprintln!("revivals: some sweep points failed; see the flagged rows"),
        Status::VerificationFailed => eprintln!("revivals: verification failed"),
    }
    Ok(outcome.status)
}
