//! Command-line entry point: solve, generate and verify workflows.
//!
//! Exit codes: 0 success (solve: Optimal), 1 input/usage error,
//! 2 iteration cap reached, 3 degenerate or unbounded problem.

use std::fs;
use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fwsdp::oracle::{
    check_barrier_inequality, check_decrement_relation, check_norm_bound, finite_difference_suite,
    CheckReport,
};
use fwsdp::problem::{
    generate_instance, parse_problem, validate_problem, write_problem, write_report, write_trace,
};
use fwsdp::{Error, SolveConfig, SolveStatus};

#[derive(Parser)]
#[command(
    name = "fwsdp",
    version,
    about = "Factor-width interior point SDP solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file (path or '-' for standard input).
    Solve(SolveArgs),
    /// Generate a strictly feasible instance with a central identity start.
    Generate(GenerateArgs),
    /// Run the verification oracle suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file in the native format; '-' reads standard input.
    input: String,
    /// Block size of the factor-width cone.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Duality-gap target.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Predictor fraction of the boundary distance, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Cap on outer iterations.
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,
    /// Worker threads (0 = all cores). Does not change any emitted byte.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the per-iteration trace to this path ('-' for standard output).
    #[arg(long)]
    trace: Option<String>,
    /// Report destination ('-' for standard output).
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct GenerateArgs {
    /// Matrix dimension (n >= 2).
    #[arg(long)]
    n: usize,
    /// Constraint count (m >= 1).
    #[arg(long)]
    m: usize,
    /// Path parameter of the identity start.
    #[arg(long, default_value_t = 1.0)]
    eta0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination ('-' for standard output).
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: barrier, gradient, decrement, all.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ambient dimension; omit to run the default grid.
    #[arg(long)]
    n: Option<usize>,
    /// Block size; omit to run the default grid.
    #[arg(long)]
    k: Option<usize>,
    /// Constraint count for the decrement suite.
    #[arg(long)]
    m: Option<usize>,
    /// Worker threads (0 = all cores). Does not change any emitted byte.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Destination ('-' for standard output).
    #[arg(long, default_value = "-")]
    output: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let code = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Generate(args) => run_generate(&args),
        Command::Verify(args) => run_verify(&args),
    };
    ExitCode::from(code)
}

fn fail(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    1
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        fs::read_to_string(path)
    }
}

fn write_output(path: &str, contents: &str) -> std::io::Result<()> {
    if path == "-" {
        std::io::stdout().write_all(contents.as_bytes())
    } else {
        fs::write(path, contents)
    }
}

fn run_solve(args: &SolveArgs) -> u8 {
    let text = match read_input(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(format_args!("cannot read '{}': {e}", args.input)),
    };
    let problem = match parse_problem::<f64>(&text) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let mut config = SolveConfig::new(args.k);
    config.epsilon = args.epsilon;
    config.sigma = args.sigma;
    config.max_outer = args.max_iters;
    config.threads = args.threads;
    let warnings = match config.validate() {
        Ok(w) => w,
        Err(e) => return fail(e),
    };
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let result = match fwsdp::ipm::solve(&problem, &config) {
        Ok(r) => r,
        Err(e @ (Error::NoStartingPoint | Error::BadDims(_))) => return fail(e),
        Err(e) => return fail(format_args!("solver failed: {e}")),
    };
    if let Some(trace_path) = &args.trace {
        if let Err(e) = write_output(trace_path, &write_trace(&result.trace)) {
            return fail(format_args!("cannot write trace: {e}"));
        }
    }
    if let Err(e) = write_output(&args.output, &write_report(&result.report)) {
        return fail(format_args!("cannot write report: {e}"));
    }
    match result.report.status {
        SolveStatus::Optimal => 0,
        SolveStatus::MaxIterations => 2,
        SolveStatus::Degenerate | SolveStatus::Unbounded => 3,
    }
}

fn run_generate(args: &GenerateArgs) -> u8 {
    if args.n < 2 {
        return fail("n must be at least 2");
    }
    if args.m < 1 {
        return fail("m must be at least 1");
    }
    if !(args.eta0 > 0.0) {
        return fail("eta0 must be positive");
    }
    let problem = generate_instance::<f64>(args.n, args.m, args.eta0, args.seed);
    debug_assert!(validate_problem(&problem).findings.is_empty());
    match write_output(&args.output, &write_problem(&problem)) {
        Ok(()) => 0,
        Err(e) => fail(format_args!("cannot write problem: {e}")),
    }
}

fn run_verify(args: &VerifyArgs) -> u8 {
    let known = ["barrier", "gradient", "decrement", "all"];
    if !known.contains(&args.suite.as_str()) {
        return fail(format_args!(
            "unknown suite '{}'; expected one of {known:?}",
            args.suite
        ));
    }
    let pairs: Vec<(usize, usize)> = match (args.n, args.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        (None, None) => vec![(4, 2), (6, 2), (6, 3)],
        _ => return fail("--n and --k must be given together"),
    };
    let decrement_combos: Vec<(usize, usize, usize)> = match (args.n, args.k) {
        (Some(n), Some(k)) => vec![(n, k, args.m.unwrap_or(2))],
        _ => vec![(4, 2, 2), (6, 3, 3)],
    };

    let mut out = String::new();
    let mut failures = 0usize;
    let mut record = |rep: CheckReport<f64>| {
        failures += rep.failures;
        out.push_str(&rep.to_line());
        out.push('\n');
    };
    let run_barrier = args.suite == "barrier" || args.suite == "all";
    let run_gradient = args.suite == "gradient" || args.suite == "all";
    let run_decrement = args.suite == "decrement" || args.suite == "all";
    let suites = || -> fwsdp::Result<Vec<CheckReport<f64>>> {
        let mut reports = Vec::new();
        if run_barrier {
            for &(n, k) in &pairs {
                reports.push(check_barrier_inequality(n, k, args.trials, args.seed)?);
            }
        }
        if run_gradient {
            for &(n, k) in &pairs {
                reports.push(finite_difference_suite(n, k, args.trials, args.seed)?);
            }
        }
        if run_decrement {
            for &(n, k, m) in &decrement_combos {
                reports.push(check_norm_bound(n, k, args.trials, args.seed)?);
                reports.push(check_decrement_relation(n, k, m, args.trials, args.seed)?);
            }
        }
        Ok(reports)
    };
    let outcome = if args.threads == 0 {
        suites()
    } else {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
        {
            Ok(pool) => pool.install(suites),
            Err(e) => return fail(format_args!("thread pool: {e}")),
        }
    };
    let reports = match outcome {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for rep in reports {
        record(rep);
    }
    if let Err(e) = write_output(&args.output, &out) {
        return fail(format_args!("cannot write reports: {e}"));
    }
    if failures == 0 {
        0
    } else {
        eprintln!("error: {failures} trial failure(s)");
        1
    }
}
