//! `fbtumor`: batch front end for the stationary, stability, mode and radial
//! delay solvers.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numerical failure,
//! `4` invariant violation.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "fbtumor", version, about = "Free-boundary tumor model with time delay")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Steady radius: leading order, first-order correction and exact delay.
    Stationary,
    /// Mode thresholds, critical intensity and classification.
    Stability,
    /// Zeroth- and first-order mode amplitude trajectories.
    Modes,
    /// Radial evolution with the delay kept in full.
    Evolve,
    /// Identity and invariant checks.
    Verify,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("FBTUMOR_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn write_tables(tables: &[Table], dir: &std::path::Path, format: Format) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    for t in tables {
        let path = t.write(dir, format)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let dir = cli.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let format = cli.format.or(cfg.output.format).unwrap_or(Format::Csv);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;

    pool.install(|| match cli.command {
        Command::Stationary => {
            let tables = commands::stationary(&cfg)?;
            write_tables(&tables, &dir, format)
        }
        Command::Stability => {
            let tables = commands::stability(&cfg)?;
            write_tables(&tables, &dir, format)
        }
        Command::Modes => {
            let tables = commands::modes(&cfg)?;
            write_tables(&tables, &dir, format)
        }
        Command::Evolve => {
            let tables = commands::evolve(&cfg)?;
            write_tables(&tables, &dir, format)
        }
        Command::Verify => {
            let checks = verify::run_checks(&cfg)?;
            print!("{}", verify::render(&checks));
            write_tables(&[verify::report(&checks)], &dir, format)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verify(failed.join(", ")))
            }
        }
    })
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbtumor: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
