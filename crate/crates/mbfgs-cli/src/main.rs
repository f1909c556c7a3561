//! Command-line front end: `solve` runs one minimization, `bench` runs a
//! suite of cases and renders iteration/time tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mbfgs::bench::{
    emit_table, emit_trace, paper_suite, parse_case_line, parse_x0, run_suite, BenchmarkCase,
    OutputFormat, SuiteConfig,
};
use mbfgs::{
    make_problem, minimize, LineSearchRule, ProblemId, SolverConfig, TerminationReason, UpdateRule,
};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "mbfgs", about = "Quasi-Newton minimization with modified BFGS updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one benchmark function from a given start point.
    Solve(SolveArgs),
    /// Run a suite of benchmark cases and render a result table.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Objective: rosenbrock, powell, wood, schumer or schwefel.
    #[arg(long)]
    function: ProblemId,
    /// Start point, comma separated: "2.2,2.0" or "3,-1,0,1".
    #[arg(long)]
    x0: String,
    /// Step rule: armijo, wolfe or goldstein.
    #[arg(long, default_value = "armijo")]
    linesearch: LineSearchRule,
    /// Secant update: mbfgs or bfgs.
    #[arg(long, default_value = "mbfgs")]
    update: UpdateRule,
    /// Gradient-norm stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Write the per-iteration trace (csv) here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in suite name; `paper` enumerates the full benchmark grid.
    #[arg(long, conflicts_with = "cases")]
    suite: Option<String>,
    /// Case file, one `function;x0;rule;update` per line.
    #[arg(long)]
    cases: Option<PathBuf>,
    /// Timing repetitions per case.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Output format: md, csv or jsonl.
    #[arg(long, default_value = "md")]
    format: OutputFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for case execution.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Directory for per-case trace files.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here too and are not usage errors.
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn run_solve(args: SolveArgs) -> ExitCode {
    let problem = make_problem(args.function);
    let x0 = match parse_x0(&args.x0) {
        Ok(x0) => x0,
        Err(err) => return usage_error(&err),
    };
    if x0.dim() != problem.dim() {
        return usage_error(&format!(
            "{} expects {} coordinates, got {}",
            args.function,
            problem.dim(),
            x0.dim()
        ));
    }

    let mut cfg = SolverConfig::new(args.update, args.linesearch);
    cfg.grad_tol = args.tol;
    cfg.max_iters = args.max_iter;
    cfg.record_trace = true;
    if let Err(err) = cfg.validate() {
        return usage_error(&err.to_string());
    }

    let result = match minimize(&problem, &x0, &cfg) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("solver error: {err}");
            return ExitCode::from(EXIT_SOLVER_FAILURE);
        }
    };

    println!("function        {} ({})", args.function, problem.name());
    println!("update          {}", args.update);
    println!("line search     {}", args.linesearch);
    println!("x0              {x0}");
    println!("termination     {}", result.termination);
    println!("iterations      {}", result.iterations);
    println!("x               {}", result.x_final);
    println!("f               {:e}", result.f_final);
    println!("grad norm       {:e}", result.grad_norm_final);
    println!("f evals         {}", result.total_f_evals);
    println!("g evals         {}", result.total_g_evals);
    println!("wall time (s)   {:.7}", result.wall_time_seconds);

    if let Some(path) = &args.trace {
        if let Err(err) = emit_trace(&result, path) {
            eprintln!("cannot write trace: {err}");
            return ExitCode::from(EXIT_SOLVER_FAILURE);
        }
        println!("trace           {}", path.display());
    }

    if result.termination == TerminationReason::Converged {
        ExitCode::SUCCESS
    } else {
        if let Some(err) = &result.linesearch_error {
            eprintln!("line search stopped the run: {err}");
        }
        ExitCode::from(EXIT_SOLVER_FAILURE)
    }
}

fn run_bench(args: BenchArgs) -> ExitCode {
    let cases: Vec<BenchmarkCase> = match (&args.suite, &args.cases) {
        (Some(name), None) => {
            if name != "paper" {
                return usage_error(&format!("unknown suite '{name}' (only 'paper' is built in)"));
            }
            paper_suite(args.reps)
        }
        (None, Some(path)) => {
            let text = match std::fs::read_to_string(path) {
                Ok(text) => text,
                Err(err) => return usage_error(&format!("cannot read {}: {err}", path.display())),
            };
            let mut cases = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                match parse_case_line(line) {
                    Ok(mut case) => {
                        case.repetitions = args.reps.max(1);
                        cases.push(case);
                    }
                    Err(err) => return usage_error(&err.to_string()),
                }
            }
            cases
        }
        _ => return usage_error("exactly one of --suite or --cases is required"),
    };

    let mut cfg = SuiteConfig::new(cases);
    cfg.format = args.format;
    cfg.trace_dir = args.trace_dir.clone();
    cfg.workers = args.parallel.max(1);

    let rows = match run_suite(&cfg) {
        Ok(rows) => rows,
        Err(err) => return usage_error(&err.to_string()),
    };
    let table = match emit_table(&rows, args.format) {
        Ok(table) => table,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    match &args.out {
        Some(path) => {
            if let Err(err) = std::fs::write(path, &table) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => print!("{table}"),
    }
    // Per-case failures are recorded in the rows; bench itself exits 0.
    ExitCode::SUCCESS
}
