//! Command-line front end of the fermion-phonon engine.
//!
//! The binary is a thin wrapper around [`run`], which parses nothing from the
//! process environment except through [`Cli`] and returns the output text, the
//! diagnostics for standard error and the exit status. This keeps every
//! subcommand testable in-process.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{Outcome, Status};
pub use config::{CorrelatorMode, Format, RunConfig};

/// Exact solution, verification suite and correlators of the fermion-phonon model.
#[derive(Debug, Parser)]
#[command(name = "fpctl", version, about)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form solution and exponent table (JSON).
    Solve,
    /// Exact identity suite, level counting, Jacobi check and field reconstruction.
    Verify,
    /// Eigenvalues of the diagonalized Hamiltonian up to an excitation energy.
    Spectrum {
        /// Largest excitation energy above the ground state.
        #[arg(long, value_name = "F")]
        e_max: f64,
    },
    /// Correlation functions on a grid of positions and times.
    Correlate {
        /// Continuum closed form or finite-size evaluation.
        #[arg(long, value_enum)]
        mode: Option<CorrelatorMode>,
        /// Regulator standing in for i0+ (also the finite-size damping).
        #[arg(long, value_name = "F")]
        regulator: Option<f64>,
        /// Renormalization length.
        #[arg(long, value_name = "F")]
        ell: Option<f64>,
    },
    /// Velocities and CDW/SC exponents over a grid of couplings.
    Scan,
}

/// Reads the `THREADS` environment value: `None` when unset or empty.
pub fn threads_from_env(value: Option<&str>) -> anyhow::Result<Option<usize>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => anyhow::bail!("THREADS must be a positive integer, got {s:?}"),
        },
    }
}

/// Runs one invocation and returns its outcome without touching the terminal.
pub fn run(cli: &Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => return Outcome::invalid(format!("{e:#}")),
        },
        None => return Outcome::invalid("a configuration file is required (--config PATH)".into()),
    };
    let mut outcome = commands::dispatch(&cli.command, &cfg, cli.format);
    outcome.path = cli.output.clone().or_else(|| cfg.output.path.clone());
    outcome
}
