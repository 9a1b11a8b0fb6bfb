//! Command-line driver for degenerate-level entanglement of two fermions.
//!
//! Subcommands `level`, `bounds`, `rcurve` and `sweep` each print a table on
//! standard output and optionally write CSV or JSON with `--output`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{output_target, BoundsConfig, ConfigFile, LevelConfig, OutputTarget, RcurveConfig, SweepConfig};
use error::{CliError, Result};
use format::Report;

#[derive(Debug, Parser)]
#[command(name = "degent", version, about = "Entanglement of zeroth-order two-fermion states in degenerate levels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zeroth-order states of level N with their entanglement.
    Level(LevelArgs),
    /// Entanglement ceilings of oscillator levels N = n_min..=n_max.
    Bounds(BoundsArgs),
    /// Entanglement of the five-state branch vector as a function of r.
    Rcurve(RcurveArgs),
    /// Configuration-interaction sweep towards lambda -> 0.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Key-value run file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// File to write (CSV, or JSON for a .json extension).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output file format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct PhysicsArgs {
    /// Confining potential: harmonic:<omega> or table:<path>.
    #[arg(long)]
    pub potential: Option<String>,
    /// Interaction: delta, harmonic:<omega>, gaussian:<A>,<s> or table:<path>.
    #[arg(long)]
    pub interaction: Option<String>,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Level label N = n1 + n2.
    #[arg(long, short)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RcurveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub r_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r_max: Option<f64>,
    /// Number of grid points including both ends.
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    /// Level label N = n1 + n2.
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Highest single-particle mode kept in the CI basis.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Comma-separated couplings, e.g. 0.2,0.1,0.05.
    #[arg(long)]
    pub lambdas: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn prepare(out: OutputArgs) -> Result<(ConfigFile, Option<OutputTarget>)> {
    let file = ConfigFile::load_optional(out.config.as_deref())?;
    let target = output_target(out.output.or(file.output.clone()), out.format.as_deref().or(file.format.as_deref()))?;
    Ok((file, target))
}

/// Runs one subcommand and returns its report together with the file target.
pub fn execute(command: Command) -> Result<(Report, Option<OutputTarget>)> {
    match command {
        Command::Level(a) => {
            let (file, target) = prepare(a.output)?;
            let cfg = LevelConfig::resolve(&file, a.physics.potential, a.physics.interaction, a.n)?;
            Ok((commands::level(&cfg, config::cache_capacity()?)?, target))
        }
        Command::Bounds(a) => {
            let (file, target) = prepare(a.output)?;
            Ok((commands::bounds(&BoundsConfig::resolve(&file, a.n_min, a.n_max)?), target))
        }
        Command::Rcurve(a) => {
            let (file, target) = prepare(a.output)?;
            Ok((commands::rcurve(&RcurveConfig::resolve(&file, a.r_min, a.r_max, a.steps)?), target))
        }
        Command::Sweep(a) => {
            let (file, target) = prepare(a.output)?;
            let lambdas = a.lambdas.as_deref().map(config::parse_lambdas).transpose()?;
            let cfg = SweepConfig::resolve(&file, a.physics.potential, a.physics.interaction, a.n, a.n_max, lambdas)?;
            Ok((commands::sweep(&cfg, config::cache_capacity()?)?, target))
        }
    }
}

/// Executes, prints, writes the output file and returns the exit status.
pub fn run(command: Command) -> i32 {
    let outcome = execute(command).and_then(|(report, target)| {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(report.text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::io("<stdout>", e))?;
        if let Some(target) = &target {
            report.write(target)?;
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            if report.violations.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
