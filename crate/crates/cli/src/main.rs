//! Command-line front end: verify the example catalog, classify maps from
//! declarative description files, run the symmetric profile reductions, and
//! probe the model-space equations. Reports go to stdout (or `--out`) as
//! JSON, CSV, or text; exit code 0 means every check passed, 1 means a
//! mathematical check failed, 2 means the input was unusable.

mod commands;
mod mapspec;
mod report;

use clap::{Parser, Subcommand};
use infharm::Error;

use commands::{
    CheckConfig, ClassifyConfig, ConformalConfig, ReduceBranch, ReduceConfig, cmd_catalog,
    cmd_check, cmd_classify, cmd_conformal, cmd_reduce,
};
use report::OutputFormat;

#[derive(Parser)]
#[command(name = "infharm", version, about = "Infinity harmonic map verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify catalog entries against their expected classification and
    /// energy density.
    Check {
        /// Catalog ids to check (default: all).
        #[arg(long = "entry")]
        entries: Vec<String>,
        /// Dimensionless classification tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Cap the number of grid points per entry.
        #[arg(long)]
        grid: Option<usize>,
        /// Seed recorded in the report (sampling grids are shipped).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        /// Write the report to a file instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Classify a map described in a TOML file.
    Classify {
        /// Path to the map description.
        file: String,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Seed for the optional random samples in the description.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<String>,
    },
    /// Solve a profile reduction, export its samples, and verify the
    /// reconstructed map end to end.
    Reduce {
        #[command(subcommand)]
        branch: ReduceBranch,
        /// Integrator / sampling step.
        #[arg(long, global = true, default_value_t = 1e-3)]
        step: f64,
        /// Points on the symmetry circle for the verification grid.
        #[arg(long, global = true, default_value_t = 24)]
        transverse: usize,
        /// Write the profile CSV here.
        #[arg(long, global = true)]
        out: Option<String>,
        #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        /// Write the verification report to a file instead of stdout.
        #[arg(long, global = true)]
        report_out: Option<String>,
    },
    /// Evaluate a model-space equation residual for an expression at random
    /// points.
    Conformal {
        /// Which equation: sphere, hyperbolic, or restriction.
        #[arg(long)]
        space: String,
        /// Scalar expression over x1..xd (xd+1 ambient for restriction).
        #[arg(long)]
        expr: String,
        /// Intrinsic dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Sampling box lower bound (per axis).
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        lo: f64,
        /// Sampling box upper bound (per axis).
        #[arg(long, default_value_t = 1.2, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<String>,
    },
    /// List the catalog.
    Catalog {
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<String>,
    },
}

fn require_positive(tol: f64) -> Result<f64, Error> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Check { entries, tol, grid, seed, format, out } => cmd_check(CheckConfig {
            entries,
            tolerance: require_positive(tol)?,
            grid_limit: grid,
            seed,
            format,
            out,
        }),
        Command::Classify { file, tol, seed, format, out } => cmd_classify(ClassifyConfig {
            file,
            tolerance: require_positive(tol)?,
            seed,
            format,
            out,
        }),
        Command::Reduce { branch, step, transverse, out, format, report_out } => {
            cmd_reduce(ReduceConfig { branch, step, transverse, format, out, report_out })
        }
        Command::Conformal { space, expr, dim, samples, seed, tol, lo, hi, format, out } => {
            cmd_conformal(ConformalConfig {
                space,
                expression: expr,
                dim,
                samples,
                seed,
                tolerance: require_positive(tol)?,
                box_range: (lo, hi),
                format,
                out,
            })
        }
        Command::Catalog { format, out } => cmd_catalog(format, out.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
