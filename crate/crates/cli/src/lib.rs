//! Command-line front end for the `fluidsym` library.
//!
//! Exit codes: 0 on success, 1 when a run fails or a criterion is not met,
//! 2 for usage and configuration errors.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{PotentialKind, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Run(#[from] fluidsym::Error),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Failed(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fluidsym", version, about = "Isentropic fluid charges and their hidden o(3,2) symmetry")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

/// Settings that replace the corresponding configuration entries.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub potential: Option<PotentialKind>,

    /// Potential strength.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,

    /// Exponent of the power-law potential.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,

    #[arg(long, global = true)]
    pub dt: Option<f64>,

    #[arg(long, global = true)]
    pub t_final: Option<f64>,

    /// Grid nodes, a power of two.
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Period of the grid.
    #[arg(long, global = true)]
    pub length: Option<f64>,

    /// Seed of the random initial state.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Overrides {
    /// Load the configuration, apply the overrides, then validate.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(kind) = self.potential {
            cfg.potential.kind = kind;
        }
        if let Some(c) = self.c {
            cfg.potential.c = c;
        }
        if let Some(omega) = self.omega {
            cfg.potential.omega = Some(omega);
        }
        if let Some(dt) = self.dt {
            cfg.integrator.dt = dt;
        }
        if let Some(t) = self.t_final {
            cfg.integrator.t_final = t;
        }
        if let Some(n) = self.n {
            cfg.grid.n = n;
        }
        if let Some(l) = self.length {
            cfg.grid.length = l;
        }
        if let Some(seed) = self.seed {
            cfg.initial.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evolve the initial state and store the trajectory and charge drifts.
    Simulate,
    /// Track all ten charges and compare with the pattern expected for the potential.
    Charges,
    /// Evaluate the 45 functional brackets on the initial state.
    Brackets,
    /// Exact structure constants and the dictionary identities.
    Algebra,
    /// Five-dimensional matrix realization of the conformal group.
    Conformal,
    /// Apply the configured transformations to the evolved trajectory.
    Transform,
    /// Energy-momentum tensor components and their conservation.
    Emtensor,
    /// Schrödinger sector: Madelung map, charges and tensor.
    Schrodinger,
    /// Run all eight acceptance criteria.
    VerifyAll,
}

/// Parse `args`, run the command and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = cli.overrides.resolve().and_then(|cfg| commands::dispatch(&cli.command, &cfg));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_exit() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
