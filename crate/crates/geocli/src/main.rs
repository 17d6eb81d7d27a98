use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geocli::eval::{evaluate_object, parse_point};
use geocli::legendre::run_legendre;
use geocli::suite::run_checks;
use geocli::{load_model, CheckReport, CliError, Tolerances};

/// Checks geometric identities of cotangent-bundle models.
#[derive(Parser)]
#[command(name = "geocli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite at seeded sample points.
    Check {
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print one geometric object at a point.
    Eval {
        model: PathBuf,
        /// connection, curvature, jacobi, tension, torsion, strong_torsion, almost_complex or metric.
        #[arg(long)]
        object: String,
        /// Point as `x=…;p=…`, comma-separated per group.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Legendre round trip and the semispray correspondence.
    Legendre {
        model: PathBuf,
        /// Also perturb the canonical spray by ε (y^1)² at ε, ε/10 and ε/100.
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Parse and validate a model file.
    Validate { model: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Overrides the model's sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the model's sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol_algebraic: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_symbolic: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_numeric: f64,
}

impl RunArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            algebraic: self.tol_algebraic,
            symbolic: self.tol_symbolic,
            numeric: self.tol_numeric,
        }
    }
}

fn emit(report: &CheckReport, path: Option<&Path>) -> Result<ExitCode, CliError> {
    eprint!("{}", report.table());
    let json = report.to_json();
    match path {
        Some(p) => std::fs::write(p, json).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        })?,
        None => print!("{json}"),
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Check { model, run } => {
            let m = load_model(&model)?;
            let seed = run.seed.unwrap_or(m.file.sampling.seed);
            let count = run.samples.unwrap_or(m.file.sampling.count);
            let report = run_checks(&m, seed, count, run.tolerances())?;
            emit(&report, run.report.as_deref())
        }
        Command::Legendre { model, epsilon, run } => {
            let m = load_model(&model)?;
            let seed = run.seed.unwrap_or(m.file.sampling.seed);
            let count = run.samples.unwrap_or(m.file.sampling.count);
            let report = run_legendre(&m, seed, count, run.tolerances(), epsilon)?;
            emit(&report, run.report.as_deref())
        }
        Command::Eval { model, object, at } => {
            let m = load_model(&model)?;
            let pt = parse_point(&m, &at)?;
            print!("{}", evaluate_object(&m, &object, &pt)?.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { model } => {
            let m = load_model(&model)?;
            println!("{}: valid, dimension {}, {}", m.id, m.dim(), m.route());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
