//! Quasi-Newton unconstrained minimization with the modified BFGS secant
//! update and three interchangeable backtracking line searches (Armijo,
//! Wolfe, Goldstein), plus a benchmark harness over five classic test
//! problems.
//!
//! The solver maintains the inverse curvature approximation M and takes
//! directions p = −M g. With the `mbfgs` update rule the secant vector is
//! y = h + max(C, 0)/‖d‖²·d, which keeps the curvature product d·y positive
//! on nonconvex problems where plain BFGS can stall.
//!
//! ```
//! use mbfgs::{make_problem, minimize, DenseVector, LineSearchRule, ProblemId, SolverConfig, UpdateRule};
//!
//! let problem = make_problem(ProblemId::Rosenbrock);
//! let x0 = DenseVector::from_slice(&[2.0, 2.0]).unwrap();
//! let cfg = SolverConfig::new(UpdateRule::Mbfgs, LineSearchRule::Armijo);
//! let result = minimize(&problem, &x0, &cfg).unwrap();
//! assert!(result.grad_norm_final <= cfg.grad_tol);
//! ```

pub mod bench;
pub mod linesearch;
pub mod numerics;
pub mod objectives;
pub mod solver;

pub use bench::{
    emit_table, emit_trace, paper_suite, run_case, run_suite, BenchError, BenchmarkCase,
    BenchmarkRow, CaseOutcome, OutputFormat, SuiteConfig,
};
pub use linesearch::{
    armijo_backtrack, check_conditions, goldstein_backtrack, wolfe_backtrack, ConditionFlags,
    LineSearchError, LineSearchRule, LineSearchSpec, StepResult,
};
pub use numerics::{DenseVector, NumericsError, SymMatrix};
pub use objectives::{
    distance_r, make_problem, Objective, Problem, ProblemId, UnknownProblem,
};
pub use solver::{
    compute_c, direct_update, inverse_update, minimize, modified_y, IterationRecord, LsFallback,
    SolverConfig, SolverError, SolverResult, TerminationReason, UpdateApplied, UpdateRule,
};
