//! Benchmark harness: runs (problem, start point, rule) grids, measures
//! averaged wall time, and renders iteration/time tables (the three line
//! searches pivoted side by side) plus per-iteration trace files for
//! plotting.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linesearch::{LineSearchRule, LineSearchSpec};
use crate::numerics::DenseVector;
use crate::objectives::{distance_r, make_problem, ProblemId};
use crate::solver::{minimize, SolverConfig, SolverResult, TerminationReason, UpdateRule};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("benchmark suite has no cases")]
    EmptySuite,
    #[error("no rows to render")]
    EmptyRows,
    #[error("result carries no trace (solver ran without record_trace)")]
    EmptyTrace,
    #[error("table grid is incomplete: {problem}/{update} at x0 = {x0} has no {rule} row")]
    IncompleteGrid {
        problem: ProblemId,
        update: UpdateRule,
        x0: String,
        rule: LineSearchRule,
    },
    #[error("cannot parse case line '{line}': {reason}")]
    ParseCase { line: String, reason: String },
    #[error("cannot parse row: {0}")]
    ParseRow(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One benchmark run: a problem, a start point, and the solver knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub problem: ProblemId,
    pub x0: DenseVector,
    pub rule: LineSearchRule,
    pub update: UpdateRule,
    /// Timing repetitions (at least 1); iteration counts come from a single
    /// additional traced run.
    pub repetitions: usize,
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
}

impl BenchmarkCase {
    pub fn new(
        problem: ProblemId,
        x0: DenseVector,
        rule: LineSearchRule,
        update: UpdateRule,
    ) -> Self {
        Self {
            problem,
            x0,
            rule,
            update,
            repetitions: 10,
            grad_tol: None,
            max_iters: None,
        }
    }

    pub fn solver_config(&self, record_trace: bool) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.update, self.rule);
        cfg.linesearch = LineSearchSpec::new(self.rule);
        if let Some(tol) = self.grad_tol {
            cfg.grad_tol = tol;
        }
        if let Some(cap) = self.max_iters {
            cfg.max_iters = cap;
        }
        cfg.record_trace = record_trace;
        cfg
    }
}

/// How a benchmark run ended. `SolverError` covers hard failures (bad
/// dimensions, non-finite values) as opposed to clean non-convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseOutcome {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "max_iters")]
    MaxIters,
    #[serde(rename = "linesearch_failure")]
    LinesearchFailure,
    #[serde(rename = "solver_error")]
    SolverError,
}

impl CaseOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseOutcome::Converged => "converged",
            CaseOutcome::MaxIters => "max_iters",
            CaseOutcome::LinesearchFailure => "linesearch_failure",
            CaseOutcome::SolverError => "solver_error",
        }
    }
}

impl From<TerminationReason> for CaseOutcome {
    fn from(t: TerminationReason) -> Self {
        match t {
            TerminationReason::Converged => CaseOutcome::Converged,
            TerminationReason::MaxIters => CaseOutcome::MaxIters,
            TerminationReason::LinesearchFailure => CaseOutcome::LinesearchFailure,
        }
    }
}

/// One table row: the case plus everything measured for it. `r` is always
/// recomputed from the start point and the known minimizer; it is `None`
/// only for hard solver errors where no distance is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub case: BenchmarkCase,
    pub r: Option<f64>,
    pub iterations: usize,
    pub mean_wall_time_seconds: f64,
    pub termination: CaseOutcome,
    pub error: Option<String>,
    pub total_f_evals: usize,
    pub total_g_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    #[serde(rename = "md")]
    Markdown,
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "jsonl")]
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "md" | "markdown" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json-lines" => Ok(OutputFormat::JsonLines),
            other => Err(format!("unknown output format '{other}' (expected md, csv or jsonl)")),
        }
    }
}

/// Configuration for a whole suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub cases: Vec<BenchmarkCase>,
    pub format: OutputFormat,
    /// When set, one per-iteration trace file per case is written here.
    pub trace_dir: Option<PathBuf>,
    /// Worker threads for case execution (timing repetitions of a single
    /// case always run sequentially on one worker).
    pub workers: usize,
}

impl SuiteConfig {
    pub fn new(cases: Vec<BenchmarkCase>) -> Self {
        Self {
            cases,
            format: OutputFormat::Markdown,
            trace_dir: None,
            workers: 1,
        }
    }
}

/// All (problem, start point) rows of the benchmark grid, crossed with the
/// three line-search rules under the modified update.
pub fn paper_suite(repetitions: usize) -> Vec<BenchmarkCase> {
    let starts: [(ProblemId, &[&[f64]]); 5] = [
        (
            ProblemId::Rosenbrock,
            &[
                &[2.2, 2.0],
                &[2.0, 2.0],
                &[1.2, 1.8],
                &[0.75, 1.0],
                &[0.0, 1.8],
                &[1.8, 2.0],
            ],
        ),
        (
            ProblemId::PowellQuartic,
            &[
                &[4.0, -1.0, 0.0, 1.0],
                &[3.0, -1.0, 1.0, 1.0],
                &[3.0, -1.0, 0.0, 1.0],
                &[3.0, -1.5, 0.0, 1.5],
            ],
        ),
        (
            ProblemId::Wood,
            &[
                &[1.0, 1.2, 1.3, 1.4],
                &[1.3, 1.2, 1.3, 1.4],
                &[1.2, 1.2, 1.2, 1.2],
                &[1.1, 1.2, 1.3, 1.4],
            ],
        ),
        (
            ProblemId::SchumerSteiglitz,
            &[
                &[0.2, 0.2],
                &[0.4, 0.4],
                &[0.8, 0.8],
                &[-0.4, 0.8],
                &[-0.4, 0.6],
            ],
        ),
        (
            ProblemId::SchwefelVariant,
            &[
                &[4.0, 8.0],
                &[5.0, 6.0],
                &[6.0, 6.0],
                &[3.0, 3.0],
                &[8.0, 6.0],
            ],
        ),
    ];
    let mut cases = Vec::new();
    for (problem, points) in starts {
        for point in points {
            for rule in LineSearchRule::ALL {
                let mut case = BenchmarkCase::new(
                    problem,
                    DenseVector::from_slice(point).expect("grid points are finite"),
                    rule,
                    UpdateRule::Mbfgs,
                );
                case.repetitions = repetitions.max(1);
                cases.push(case);
            }
        }
    }
    cases
}

fn run_case_full(case: &BenchmarkCase) -> (BenchmarkRow, Option<SolverResult>) {
    let problem = make_problem(case.problem);
    let r = distance_r(&case.x0, problem.known_minimizer()).ok();

    let traced = minimize(&problem, &case.x0, &case.solver_config(true));
    let (iterations, termination, error, total_f_evals, total_g_evals, result) = match traced {
        Ok(result) => (
            result.iterations,
            result.termination.into(),
            result
                .linesearch_error
                .as_ref()
                .map(|e| e.to_string()),
            result.total_f_evals,
            result.total_g_evals,
            Some(result),
        ),
        Err(err) => (0, CaseOutcome::SolverError, Some(err.to_string()), 0, 0, None),
    };

    // Untraced repetitions for the timing column.
    let reps = case.repetitions.max(1);
    let cfg = case.solver_config(false);
    let mut total = 0.0;
    for _ in 0..reps {
        let begin = std::time::Instant::now();
        let _ = minimize(&problem, &case.x0, &cfg);
        total += begin.elapsed().as_secs_f64();
    }

    let row = BenchmarkRow {
        case: case.clone(),
        r,
        iterations,
        mean_wall_time_seconds: total / reps as f64,
        termination,
        error,
        total_f_evals,
        total_g_evals,
    };
    (row, result)
}

/// Runs one case: a traced run for the iteration count plus timed untraced
/// repetitions. Solver failures are folded into the row rather than raised.
pub fn run_case(case: &BenchmarkCase) -> BenchmarkRow {
    run_case_full(case).0
}

/// Runs every case of the suite; row order matches case order. Per-case
/// failures are recorded in their rows without aborting the suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<BenchmarkRow>, BenchError> {
    if cfg.cases.is_empty() {
        return Err(BenchError::EmptySuite);
    }
    let workers = cfg.workers.max(1).min(cfg.cases.len());
    let mut outputs: Vec<Option<(BenchmarkRow, Option<SolverResult>)>> =
        (0..cfg.cases.len()).map(|_| None).collect();

    if workers == 1 {
        for (slot, case) in outputs.iter_mut().zip(&cfg.cases) {
            *slot = Some(run_case_full(case));
        }
    } else {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<&mut Option<_>>> = outputs.iter_mut().map(Mutex::new).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= cfg.cases.len() {
                        break;
                    }
                    let out = run_case_full(&cfg.cases[i]);
                    **slots[i].lock().unwrap() = Some(out);
                });
            }
        });
    }

    let mut rows = Vec::with_capacity(cfg.cases.len());
    for (case, output) in cfg.cases.iter().zip(outputs) {
        let (row, result) = output.expect("every case slot is filled");
        if let (Some(dir), Some(result)) = (&cfg.trace_dir, result) {
            std::fs::create_dir_all(dir)?;
            let x0: Vec<String> = case.x0.iter().map(|v| v.to_string()).collect();
            let name = format!(
                "{}_{}_{}_{}.csv",
                case.problem,
                case.update,
                case.rule,
                x0.join("_")
            );
            emit_trace(&result, &dir.join(name))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn fmt_x0(x0: &DenseVector) -> String {
    x0.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders rows in the requested format: a pivoted table for markdown
/// (rules side by side, grouped by problem), or flat machine-readable
/// csv/json-lines with full-precision numbers.
pub fn emit_table(rows: &[BenchmarkRow], format: OutputFormat) -> Result<String, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::EmptyRows);
    }
    match format {
        OutputFormat::Markdown => emit_markdown(rows),
        OutputFormat::Csv => Ok(emit_csv(rows)),
        OutputFormat::JsonLines => Ok(emit_jsonl(rows)),
    }
}

fn title(rule: LineSearchRule) -> &'static str {
    match rule {
        LineSearchRule::Armijo => "Armijo",
        LineSearchRule::Goldstein => "Goldstein",
        LineSearchRule::Wolfe => "Wolfe",
    }
}

fn emit_markdown(rows: &[BenchmarkRow]) -> Result<String, BenchError> {
    // Pivot key: (problem, update) block, one line per start point, the
    // rules present in the row set spread into side-by-side columns.
    let rules: Vec<LineSearchRule> = LineSearchRule::ALL
        .into_iter()
        .filter(|rule| rows.iter().any(|row| row.case.rule == *rule))
        .collect();

    let mut blocks: Vec<(ProblemId, UpdateRule)> = Vec::new();
    for row in rows {
        let key = (row.case.problem, row.case.update);
        if !blocks.contains(&key) {
            blocks.push(key);
        }
    }

    let mut out = String::new();
    for (problem, update) in blocks {
        let block_rows: Vec<&BenchmarkRow> = rows
            .iter()
            .filter(|row| row.case.problem == problem && row.case.update == update)
            .collect();
        let mut points: Vec<&DenseVector> = Vec::new();
        for row in &block_rows {
            if !points.iter().any(|p| **p == row.case.x0) {
                points.push(&row.case.x0);
            }
        }

        let name = make_problem(problem).name();
        out.push_str(&format!("## {name} ({update})\n\n"));
        out.push_str("| initial guess | r |");
        for rule in &rules {
            out.push_str(&format!(" Iteration in {} |", title(*rule)));
        }
        for rule in &rules {
            out.push_str(&format!(" (Avg Time) {} |", title(*rule)));
        }
        out.push('\n');
        out.push_str("|---|---|");
        for _ in 0..2 * rules.len() {
            out.push_str("---|");
        }
        out.push('\n');

        for point in points {
            let find = |rule: LineSearchRule| {
                block_rows
                    .iter()
                    .find(|row| row.case.x0 == *point && row.case.rule == rule)
                    .copied()
                    .ok_or_else(|| BenchError::IncompleteGrid {
                        problem,
                        update,
                        x0: point.to_string(),
                        rule,
                    })
            };
            let first = find(rules[0])?;
            match first.r {
                Some(r) => out.push_str(&format!("| {} | {:.3} |", point, r)),
                None => out.push_str(&format!("| {} | |", point)),
            }
            for rule in &rules {
                let row = find(*rule)?;
                if row.termination == CaseOutcome::Converged {
                    out.push_str(&format!(" {} |", row.iterations));
                } else {
                    out.push_str(&format!(" {} ({}) |", row.iterations, row.termination.as_str()));
                }
            }
            for rule in &rules {
                let row = find(*rule)?;
                out.push_str(&format!(" {:.7} |", row.mean_wall_time_seconds));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

fn emit_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(
        "problem,x0,rule,update,r,iterations,mean_wall_time_seconds,termination,error,total_f_evals,total_g_evals\n",
    );
    for row in rows {
        let r = row.r.map(|v| v.to_string()).unwrap_or_default();
        let error = row
            .error
            .as_ref()
            .map(|e| format!("\"{}\"", e.replace('"', "\"\"")))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},\"{}\",{},{},{},{},{},{},{},{},{}\n",
            row.case.problem,
            fmt_x0(&row.case.x0),
            row.case.rule,
            row.case.update,
            r,
            row.iterations,
            row.mean_wall_time_seconds,
            row.termination.as_str(),
            error,
            row.total_f_evals,
            row.total_g_evals,
        ));
    }
    out
}

fn emit_jsonl(rows: &[BenchmarkRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("rows serialize"));
        out.push('\n');
    }
    out
}

/// Parses json-lines text back into rows; the exact inverse of the jsonl
/// rendering of [`emit_table`].
pub fn parse_jsonl(text: &str) -> Result<Vec<BenchmarkRow>, BenchError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(BenchError::from))
        .collect()
}

/// Writes one csv row per iteration of a recorded trace: the data behind
/// f-vs-iteration convergence plots. Numbers keep full round-trip precision.
pub fn emit_trace(result: &SolverResult, path: &Path) -> Result<(), BenchError> {
    if result.trace.is_empty() {
        return Err(BenchError::EmptyTrace);
    }
    let mut out = String::from("iter,f,grad_norm,step,backtracks,C,update_applied,f_evals,g_evals\n");
    for record in &result.trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            record.k,
            record.f,
            record.grad_norm,
            record.step,
            record.backtracks,
            record.c_value,
            record.update_applied.as_str(),
            record.f_evals,
            record.g_evals,
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses one `function;x0;rule;update` case line, the schema of case files
/// fed to the CLI.
pub fn parse_case_line(line: &str) -> Result<BenchmarkCase, BenchError> {
    let parse_err = |reason: String| BenchError::ParseCase {
        line: line.to_string(),
        reason,
    };
    let parts: Vec<&str> = line.split(';').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(parse_err(format!(
            "expected 4 ';'-separated fields, found {}",
            parts.len()
        )));
    }
    let problem: ProblemId = parts[0].parse().map_err(|e| parse_err(format!("{e}")))?;
    let x0 = parse_x0(parts[1]).map_err(&parse_err)?;
    let rule: LineSearchRule = parts[2].parse().map_err(|e| parse_err(format!("{e}")))?;
    let update: UpdateRule = parts[3].parse().map_err(parse_err)?;
    Ok(BenchmarkCase::new(problem, x0, rule, update))
}

/// Parses a comma-separated coordinate list like `2.2,2.0`.
pub fn parse_x0(text: &str) -> Result<DenseVector, String> {
    let entries: Result<Vec<f64>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect();
    let entries = entries.map_err(|e| format!("bad coordinate in '{text}': {e}"))?;
    DenseVector::new(entries).map_err(|e| e.to_string())
}
