//! The `splitlab` command line.
//!
//! Exit statuses: 0 ok, 2 validation, 3 precision floor, 4 I/O,
//! 5 invariant failure.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use commands::{DiffArgs, GridArgs, HscanArgs, ManifoldArgs, RateArgs, VerifyArgs};
use config::{CommonArgs, RunConfig};
pub use error::{CliError, CliResult};
use output::Table;

#[derive(Parser, Debug)]
#[command(name = "splitlab", version, about = "Hyperbolic splitting of a Blaschke-deformed cat map")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the invariant suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Splitting data at one point.
    Rate(RateArgs),
    /// Expansion rate on a lattice.
    Grid(GridArgs),
    /// First or second difference quotient on a lattice.
    Diff(DiffArgs),
    /// Offset sweep of both quotients with per-point slope fits.
    Hscan(HscanArgs),
    /// Stable and unstable manifolds of the fixed point.
    Manifold(ManifoldArgs),
}

fn execute(cli: &Cli) -> CliResult<(Table, Option<CliError>)> {
    let cfg = RunConfig::resolve(&cli.common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Verify(a) => commands::verify_cmd(&cfg, a),
        Command::Rate(a) => commands::rate_cmd(&cfg, a).map(|t| (t, None)),
        Command::Grid(a) => commands::grid_cmd(&cfg, a).map(|t| (t, None)),
        Command::Diff(a) => commands::diff_cmd(&cfg, a).map(|t| (t, None)),
        Command::Hscan(a) => commands::hscan_cmd(&cfg, a).map(|t| (t, None)),
        Command::Manifold(a) => commands::manifold_cmd(&cfg, a).map(|t| (t, None)),
    })
}

fn emit(cli: &Cli, table: &Table, stdout: &mut dyn Write) -> CliResult<()> {
    let bytes = table.render(cli.common.format)?;
    match &cli.common.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => Ok(stdout.write_all(&bytes)?),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = execute(&cli).and_then(|(table, deferred)| {
        emit(&cli, &table, stdout)?;
        deferred.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
