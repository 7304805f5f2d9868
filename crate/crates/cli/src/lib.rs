//! Command-line front end for `chaingeo`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns
//! the process exit code: `0` on success, `1` for bad input, `2` when a
//! verification fails (a JSON failure report is emitted in that case).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod commands;
mod input;
mod report;
pub mod suites;

pub use report::{Format, Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chaingeo::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "chaingeo",
    version,
    about = "Chains, Cartan invariants and Toledo invariants in complex hyperbolic space"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "CHAINGEO_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Sample count (meaning depends on the command).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Tolerance override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cartan invariants of boundary triples.
    Cartan(commands::CartanArgs),
    /// Points along the chain through two boundary points.
    Chain(commands::ChainArgs),
    /// Toledo invariant of a surface group representation.
    Toledo(commands::ToledoArgs),
    /// Monte Carlo values of the bounded 2-form of the Cartan cocycle.
    DeltaForm(commands::DeltaFormArgs),
    /// Fit a rigid embedding to boundary samples.
    Reconstruct(commands::ReconstructArgs),
    /// Exact checks on a finite group model of the resolutions.
    FiniteModel(commands::FiniteModelArgs),
    /// Run invariant suites.
    Verify(commands::VerifyArgs),
}

/// Runs the CLI on `argv` (including the program name), writing to the
/// process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => match emit(&cli.global, &report, out) {
            Ok(()) if report.failed() => EXIT_VERIFY,
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs the parsed command, inside a dedicated thread pool when
/// `--threads` is given.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let go = || commands::dispatch(&cli.global, &cli.command);
    match cli.global.threads {
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Input(e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn emit(global: &Global, report: &Report, out: &mut dyn Write) -> Result<(), CliError> {
    let text = report.render(global.format)?;
    match &global.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}
