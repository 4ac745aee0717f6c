use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cspline_core::catalog::{self, ExampleOptions, ExampleRun};
use cspline_core::localization::CoercivityOptions;
use cspline_core::problem::{self, ProblemFile};
use cspline_core::spline::{self, SplineProblem, SplineReport, DEFAULT_TOL};
use cspline_core::{Error, Result};

const SOLVABLE: u8 = 0;
const FAILURE: u8 = 1;
const UNSOLVABLE: u8 = 2;

/// B-spline interpolation in Hilbert C*-modules over finite-dimensional
/// C*-algebras.
#[derive(Parser)]
#[command(name = "cspline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the interpolation problem described by a JSON file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Solve and run every condition check, optionally with coercivity.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a built-in example: projection, remark, abelian, l2-truncation.
    Example {
        name: String,
        /// Parameters as key=value, e.g. N=8 j=4.
        params: Vec<String>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Tolerance; falls back to the file, then CSPLINE_TOL, then 1e-9.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for sampled states and targets [default: file seed or 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Emit a machine-readable JSON document.
    #[arg(long)]
    json: bool,
    /// Estimate the coercivity constants.
    #[arg(long)]
    coercivity: bool,
    /// Comma-separated k values in (0, 1].
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<f64>>,
    /// Pure states sampled per block.
    #[arg(long, default_value_t = 64)]
    states: usize,
    /// Targets sampled per state.
    #[arg(long, default_value_t = 64)]
    targets: usize,
}

impl Flags {
    fn tol(&self, file_tol: Option<f64>) -> Result<f64> {
        let tol = match (self.tol, file_tol) {
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => match std::env::var("CSPLINE_TOL") {
                Ok(v) => v
                    .parse()
                    .map_err(|_| Error::validation(format!("CSPLINE_TOL is not a number: \"{v}\"")))?,
                Err(_) => DEFAULT_TOL,
            },
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::validation(format!("tol must be positive, got {tol}")));
        }
        Ok(tol)
    }

    fn coercivity_options(&self, seed: u64, tol: f64) -> CoercivityOptions {
        let mut opts = CoercivityOptions {
            states_per_block: self.states,
            targets: self.targets,
            seed,
            tol,
            ..CoercivityOptions::default()
        };
        if let Some(k) = &self.k_grid {
            opts.k_grid = k.clone();
        }
        opts
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { FAILURE } else { SOLVABLE });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { file, flags } => run_file(&file, &flags, false),
        Command::Analyze { file, flags } => run_file(&file, &flags, true),
        Command::Example { name, params, flags } => run_example(&name, &params, &flags),
    }
}

fn load(file: &std::path::Path, flags: &Flags) -> Result<(ProblemFile, SplineProblem, u64)> {
    let pf = problem::parse_problem(file)?;
    let tol = flags.tol(pf.tol)?;
    let seed = flags.seed.or(pf.seed).unwrap_or(0);
    let p = pf.problem(tol)?;
    Ok((pf, p, seed))
}

fn run_file(file: &std::path::Path, flags: &Flags, full: bool) -> Result<u8> {
    let (_, p, seed) = load(file, flags)?;
    let report = if full || flags.coercivity {
        let opts = flags.coercivity.then(|| flags.coercivity_options(seed, p.tol()));
        if let Some(o) = &opts {
            validate_k_grid(&o.k_grid)?;
        }
        spline::analyze(&p, opts.as_ref())
    } else {
        spline::solve(&p)
    };
    if flags.json {
        println!("{}", problem::document_json(&p, Some(seed), &report));
    } else {
        print_report(&report, full);
    }
    Ok(if report.solvable { SOLVABLE } else { UNSOLVABLE })
}

fn validate_k_grid(k: &[f64]) -> Result<()> {
    if k.is_empty() || k.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::validation(format!("k-grid values must lie in (0, 1], got {k:?}")));
    }
    Ok(())
}

fn run_example(name: &str, raw: &[String], flags: &Flags) -> Result<u8> {
    let params = raw
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::validation(format!("expected key=value, got \"{kv}\"")))
        })
        .collect::<Result<Vec<_>>>()?;
    let tol = flags.tol(None)?;
    let seed = flags.seed.unwrap_or(0);
    let coercivity = flags.coercivity_options(seed, tol);
    validate_k_grid(&coercivity.k_grid)?;
    let opts = ExampleOptions { tol, seed, coercivity };
    let run = catalog::run_example(name, &params, &opts)?;
    if flags.json {
        println!("{}", example_json(&run, seed));
    } else {
        print_example(&run);
    }
    Ok(if run.passed() { SOLVABLE } else { FAILURE })
}

fn example_json(run: &ExampleRun, seed: u64) -> Value {
    json!({
        "example": run.name,
        "passed": run.passed(),
        "verdicts": run.verdicts,
        "ratios": run.ratios,
        "problem": problem::problem_json(&run.problem, Some(seed)),
        "report": problem::report_json(&run.report),
    })
}

fn print_report(r: &SplineReport, full: bool) {
    println!("solvable: {}", r.solvable);
    match &r.solution {
        Some(s) => {
            println!("solution: {}", problem::module_vector_json(s));
            println!("residual: {:.3e}", r.residual);
        }
        None => println!(
            "best least-squares residual: {:.3e} (threshold {:.3e})",
            r.ls_residual, r.threshold
        ),
    }
    println!("unique: {}", r.unique);
    println!(
        "radical dimensions: right {}, left {}",
        r.radical_dims.0, r.radical_dims.1
    );
    if full {
        println!("necessary condition: {}", r.necessary_condition);
        println!("positive on Y: {}", r.positive_on_y);
        println!("solvable for all targets: {}", r.solvable_for_all_targets);
        println!("range containment T(X) in T(Y): {}", r.naive_range_containment);
    }
    if let Some(t) = &r.coercivity {
        println!(
            "coercivity ({} states, {} targets each, seed {}):",
            t.states, t.targets_per_state, t.seed
        );
        println!("  {:>8}  {:>14}  {:>9}  {:>6}", "k", "c_hat", "witnesses", "unmet");
        for row in &t.rows {
            println!(
                "  {:>8.4}  {:>14.6e}  {:>9}  {:>6}",
                row.k, row.c_hat, row.witnesses, row.unmet
            );
            if let Some(note) = &row.note {
                println!("            {note}");
            }
        }
    }
    for d in &r.diagnostics {
        println!("note: {d}");
    }
}

fn print_example(run: &ExampleRun) {
    println!("example: {}", run.name);
    if !run.ratios.is_empty() {
        println!("  {:>3}  {:>14}  {:>14}", "j", "ratio", "(1/2j)^2");
        for r in &run.ratios {
            println!("  {:>3}  {:>14.6e}  {:>14.6e}", r.j, r.ratio, r.bound);
        }
    }
    for v in &run.verdicts {
        println!(
            "[{}] {}: expected {}, measured {}",
            if v.pass { "ok" } else { "MISMATCH" },
            v.check,
            v.expected,
            v.measured
        );
    }
    println!("{}", if run.passed() { "all checks match" } else { "some checks do not match" });
}
