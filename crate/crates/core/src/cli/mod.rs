//! Command-line front end: `run`, `fig1`, `fig2` and `selftest`.
//!
//! Exit status is 0 on success, 1 when an assertion or dominance check
//! fails (or a computation aborts) and 2 for configuration errors.

pub mod config;
pub mod figures;
pub mod run;
pub mod selftest;
pub mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RunConfig};
pub use figures::{fig1, fig2, Check, FigureReport};
pub use run::{run, trajectory_tables, Scenario};
pub use selftest::{selftest, GroupResult};
pub use table::{PlotOptions, Table, TableError, CURVE_HEADER, RATE_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    /// The configured model could not be built.
    #[error("config error: {0}")]
    Model(crate::Error),
    #[error("computation failed: {0}")]
    Compute(crate::Error),
    #[error("check failed: {0}")]
    Table(#[from] TableError),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qfigrowth", version, about = "QFI growth under Lindblad dynamics: trajectories, bounds and figures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one configured scenario and write its curve table.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Bound curves and oscillator trajectories.
    Fig1 {
        #[arg(long, default_value = "fig1")]
        out: PathBuf,
    },
    /// Detuning bandwidths of the oscillator readouts.
    Fig2 {
        #[arg(long, default_value = "fig2")]
        out: PathBuf,
    },
    /// Property checks of every module, one line per group.
    Selftest {
        /// Rank tolerance used for every SLD.
        #[arg(long, default_value_t = crate::fisher::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Run a single group.
        #[arg(long)]
        only: Option<String>,
    },
}

fn print_checks(report: &FigureReport) {
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
}

fn figure(result: Result<FigureReport, CliError>) -> Result<(), CliError> {
    let report = result?;
    print_checks(&report);
    report.into_result().map(|_| ())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let table = run(&cfg)?;
            println!("{} rows, dominance ok", table.rows.len());
            for out in &cfg.outputs {
                println!("wrote {}", out.csv.display());
            }
            Ok(())
        }
        Command::Fig1 { out } => figure(fig1(&out)),
        Command::Fig2 { out } => figure(fig2(&out)),
        Command::Selftest { rank_tol, only } => {
            if let Some(o) = &only {
                if !selftest::group_names().contains(&o.as_str()) {
                    return Err(CliError::Assertion(format!("unknown group `{o}`; groups: {}", selftest::group_names().join(", "))));
                }
            }
            let results = selftest(rank_tol, only.as_deref());
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Assertion(format!("{failed} selftest group(s) failed")))
            }
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
