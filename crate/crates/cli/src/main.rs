//! `compat`: compatibility radii, parent constructions, parent search, LHS
//! models and table reproduction from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compat_core::Error;
use thiserror::Error as ThisError;

use crate::output::{Format, Sink};

const CSV_COLUMNS: &str = "\
CSV columns (header row always written):
  validate            constraint, magnitude
  radius              value, witness_c0, witness_cx, witness_cy, witness_cz, method,
                      oracle_value, oracle_dev
  construct           alpha, eta, nx, ny, nz
  search              n, planar, seed, samples, completed_samples, budget_exhausted, best_radius
  search --history    iteration, radius
  lhs build           index, p, hidden_x, hidden_y, hidden_z
  lhs verify          ok, max_dev
  bounds              name, at, value, kind
  reproduce table2    n, status, then <column>, <column>_ref, <column>_dev for
                      planar_symmetric, planar_numeric, thomson, general_numeric
  reproduce platonic  kind, outcomes, computed, closed_form, published,
                      dev_closed_form, dev_published
  reproduce table1    r, parent, result, size, max_dev, best_radius,
                      direction_x, direction_y, direction_z

Exit codes: 0 success, 1 other error, 2 validation failure, 3 infeasible,
4 time budget exhausted.

Environment: COMPAT_THREADS caps the search worker count.";

#[derive(Parser, Debug)]
#[command(name = "compat", version, about = "Compatibility radii of qubit POVMs and Werner-state LHS models", after_long_help = CSV_COLUMNS)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,

    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance for POVM validation and model verification.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a POVM file for positivity, normalization and unit directions.
    Validate {
        #[arg(long)]
        povm: PathBuf,
    },
    /// Compatibility radius of a POVM by facet enumeration.
    Radius(commands::RadiusArgs),
    /// Build a parent POVM.
    Construct {
        #[command(subcommand)]
        kind: commands::ConstructKind,
    },
    /// Random search for a parent with large radius.
    Search(commands::SearchArgs),
    /// Local-hidden-state models for Werner states.
    Lhs {
        #[command(subcommand)]
        action: commands::LhsAction,
    },
    /// Radius caps and planar cost bounds.
    Bounds(commands::BoundsArgs),
    /// Regenerate the reference tables.
    Reproduce {
        #[command(subcommand)]
        table: commands::ReproduceTable,
    },
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),

    #[error("{0}: {1}")]
    Parse(PathBuf, serde_json::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Validation(String),

    #[error("time budget exhausted: {0}")]
    BudgetExhausted(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::BudgetExhausted(_) => 4,
            CliError::Core(e) => match e {
                Error::InvalidPovm(_) | Error::NotUnit(_) | Error::ShapeMismatch(_) | Error::NotPlanar => 2,
                Error::Infeasible(_) | Error::InfeasibleWeights => 3,
                _ => 1,
            },
            CliError::Parse(..) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sink = Sink {
        format: cli.common.format,
        out: cli.common.out,
    };
    let tol = cli.common.tol;
    let result = match cli.command {
        Command::Validate { povm } => commands::validate(&povm, tol, &sink),
        Command::Radius(args) => commands::radius(&args, tol, &sink),
        Command::Construct { kind } => commands::construct(&kind, &sink),
        Command::Search(args) => commands::search(&args, &sink),
        Command::Lhs { action } => commands::lhs(&action, tol, &sink),
        Command::Bounds(args) => commands::bounds(&args, &sink),
        Command::Reproduce { table } => commands::reproduce(&table, &sink),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
