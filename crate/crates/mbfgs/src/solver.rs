//! Quasi-Newton driver: search direction p = −M g from the inverse
//! approximation M, a backtracking line search, and the rank-two secant
//! update. With the modified update the secant vector is
//! y = h + max(C, 0)/‖d‖²·d, which keeps d·y positive on nonconvex stretches
//! where the plain gradient difference h would lose it.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linesearch::{backtrack, LineSearchError, LineSearchRule, LineSearchSpec, LineSearchSpecError};
use crate::numerics::{DenseVector, NumericsError, SymMatrix};
use crate::objectives::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateRule {
    #[serde(rename = "bfgs")]
    Bfgs,
    #[serde(rename = "mbfgs")]
    Mbfgs,
}

impl UpdateRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            UpdateRule::Bfgs => "bfgs",
            UpdateRule::Mbfgs => "mbfgs",
        }
    }
}

impl std::fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UpdateRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bfgs" => Ok(UpdateRule::Bfgs),
            "mbfgs" => Ok(UpdateRule::Mbfgs),
            other => Err(format!("unknown update rule '{other}' (expected bfgs or mbfgs)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub update: UpdateRule,
    /// Stop once ‖g‖ drops to this or below.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Skip the rank-two update when d·y ≤ this · ‖d‖·‖y‖.
    pub curvature_skip_tol: f64,
    pub linesearch: LineSearchSpec,
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(update: UpdateRule, rule: LineSearchRule) -> Self {
        Self {
            update,
            grad_tol: 1e-6,
            max_iters: 2000,
            curvature_skip_tol: 1e-12,
            linesearch: LineSearchSpec::new(rule),
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.grad_tol > 0.0) {
            return Err(SolverError::BadConfig("grad_tol must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(SolverError::BadConfig("max_iters must be at least 1".into()));
        }
        if self.curvature_skip_tol < 0.0 {
            return Err(SolverError::BadConfig(
                "curvature_skip_tol must be nonnegative".into(),
            ));
        }
        self.linesearch.validate()?;
        Ok(())
    }
}

/// Which secant branch produced the update at an iteration, or whether the
/// update was skipped to protect positive definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateApplied {
    #[serde(rename = "bfgs_branch")]
    BfgsBranch,
    #[serde(rename = "mbfgs_branch")]
    MbfgsBranch,
    #[serde(rename = "skipped")]
    Skipped,
}

impl UpdateApplied {
    pub fn as_str(&self) -> &'static str {
        match self {
            UpdateApplied::BfgsBranch => "bfgs_branch",
            UpdateApplied::MbfgsBranch => "mbfgs_branch",
            UpdateApplied::Skipped => "skipped",
        }
    }
}

/// A line search that could not satisfy its full rule, resolved by taking a
/// sufficient-decrease step instead of aborting the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LsFallback {
    /// Wolfe exhausted backtracking with the curvature condition unmet; the
    /// best sufficient-decrease trial was taken.
    Wolfe,
    /// The halving grid skipped the Goldstein window; the bracketing trial
    /// below the window (which satisfies the upper bound) was taken.
    Goldstein,
}

/// One row of a convergence trace. Row 0 is the starting point (step,
/// backtracks and C are zero there); row k ≥ 1 describes the k-th accepted
/// step. Evaluation counts are cumulative.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: DenseVector,
    pub f: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub backtracks: u32,
    pub c_value: f64,
    pub update_applied: UpdateApplied,
    pub f_evals: usize,
    pub g_evals: usize,
    /// Present when the step came from a recorded line-search fallback
    /// rather than a fully satisfied rule.
    pub fallback: Option<LsFallback>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "max_iters")]
    MaxIters,
    #[serde(rename = "linesearch_failure")]
    LinesearchFailure,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminationReason::Converged => "converged",
            TerminationReason::MaxIters => "max_iters",
            TerminationReason::LinesearchFailure => "linesearch_failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub x_final: DenseVector,
    pub f_final: f64,
    pub grad_norm_final: f64,
    /// Number of accepted steps (the convergence check at x0 is not one).
    pub iterations: usize,
    pub termination: TerminationReason,
    pub wall_time_seconds: f64,
    /// Per-iteration rows, empty unless `record_trace` was set.
    pub trace: Vec<IterationRecord>,
    pub total_f_evals: usize,
    pub total_g_evals: usize,
    /// The line-search error that stopped the run, when termination is
    /// `LinesearchFailure`.
    pub linesearch_error: Option<LineSearchError>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("start point has dimension {found}, problem expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite {what} at iteration {iteration}, x = {x}")]
    NonFinite {
        iteration: usize,
        what: &'static str,
        x: DenseVector,
    },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    LineSearchSpec(#[from] LineSearchSpecError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

// Threshold for treating a computed C as genuinely positive, relative to
// the magnitude of the terms whose cancellation produces it. Well above
// f64 roundoff (~1e-16) and far below any real nonconvexity signal.
const C_BRANCH_RELATIVE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpdateError {
    #[error("curvature d·y = {d_dot_y} at or below threshold {threshold}; update skipped")]
    CurvatureSkipped { d_dot_y: f64, threshold: f64 },
    #[error("degenerate step: ‖d‖ = 0")]
    DegenerateStep,
    #[error("nonpositive denominator {name} = {value}")]
    NonPositiveDenominator { name: &'static str, value: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The curvature correction scalar
/// C = 2·(f_j − f_{j+1}) + (g_{j+1} + g_j)·d. It vanishes identically on
/// quadratics and is positive where f bends below its quadratic model.
pub fn compute_c(
    f_j: f64,
    f_next: f64,
    g_j: &DenseVector,
    g_next: &DenseVector,
    d_j: &DenseVector,
) -> Result<f64, NumericsError> {
    Ok(2.0 * (f_j - f_next) + g_next.dot(d_j)? + g_j.dot(d_j)?)
}

/// The modified secant vector y = h + max(C, 0)/‖d‖²·d. With C ≤ 0 this is
/// exactly h, which is the plain BFGS branch.
pub fn modified_y(h: &DenseVector, d: &DenseVector, c: f64) -> Result<DenseVector, UpdateError> {
    let d_norm_sq = d.dot(d)?;
    if d_norm_sq == 0.0 {
        return Err(UpdateError::DegenerateStep);
    }
    Ok(h.add_scaled(c.max(0.0) / d_norm_sq, d)?)
}

/// Rank-two update of the inverse approximation:
/// M₊ = (I − ρ d yᵀ) M (I − ρ y dᵀ) + ρ d dᵀ with ρ = 1/(d·y). This is the
/// algebraic inverse of the direct rank-two form kept in [`direct_update`].
///
/// Skips (leaving the caller's M in place) when d·y ≤ skip_tol·‖d‖·‖y‖, the
/// regime where the update could destroy positive definiteness.
pub fn inverse_update(
    m: &SymMatrix,
    d: &DenseVector,
    y: &DenseVector,
    skip_tol: f64,
) -> Result<SymMatrix, UpdateError> {
    let d_dot_y = d.dot(y)?;
    let threshold = skip_tol * d.norm2() * y.norm2();
    if d_dot_y <= threshold {
        return Err(UpdateError::CurvatureSkipped { d_dot_y, threshold });
    }
    let rho = 1.0 / d_dot_y;
    let my = m.mat_vec(y)?;
    let y_m_y = y.dot(&my)?;
    let dd_coeff = rho * rho * y_m_y + rho;
    let next = SymMatrix::from_fn_lower(m.order(), |i, j| {
        m.get(i, j) - rho * (d[i] * my[j] + my[i] * d[j]) + dd_coeff * d[i] * d[j]
    });
    Ok(next)
}

/// The direct rank-two form
/// B₊ = B − (B d dᵀ B)/(dᵀ B d) + (y yᵀ)/(dᵀ y), maintained only as a
/// cross-check: along a run, the inverse of this must equal the result of
/// [`inverse_update`].
pub fn direct_update(
    b: &SymMatrix,
    d: &DenseVector,
    y: &DenseVector,
) -> Result<SymMatrix, UpdateError> {
    let bd = b.mat_vec(d)?;
    let d_b_d = d.dot(&bd)?;
    if d_b_d <= 0.0 {
        return Err(UpdateError::NonPositiveDenominator {
            name: "d·Bd",
            value: d_b_d,
        });
    }
    let d_dot_y = d.dot(y)?;
    if d_dot_y <= 0.0 {
        return Err(UpdateError::NonPositiveDenominator {
            name: "d·y",
            value: d_dot_y,
        });
    }
    let next = SymMatrix::from_fn_lower(b.order(), |i, j| {
        b.get(i, j) - bd[i] * bd[j] / d_b_d + y[i] * y[j] / d_dot_y
    });
    Ok(next)
}

/// Minimizes `obj` from `x0`: iterates x⁺ = x + a·p with p = −M g, the step
/// from the configured line search, and M maintained by the rank-two update
/// (modified secant vector when `update` is MBFGS and C > 0). M starts as
/// the identity. Stops at ‖g‖ ≤ grad_tol, at the iteration cap, or when the
/// line search fails with no usable step.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &DenseVector,
    cfg: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    cfg.validate()?;
    if x0.dim() != obj.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: obj.dim(),
            found: x0.dim(),
        });
    }

    let start = Instant::now();
    let mut x = x0.clone();
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut f_evals = 1usize;
    let mut g_evals = 1usize;
    check_finite(f, &g, 0, &x)?;

    let mut m = SymMatrix::identity(obj.dim());
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(IterationRecord {
            k: 0,
            x: x.clone(),
            f,
            grad_norm: g.norm2(),
            step: 0.0,
            backtracks: 0,
            c_value: 0.0,
            update_applied: UpdateApplied::Skipped,
            f_evals,
            g_evals,
            fallback: None,
        });
    }

    let mut iterations = 0usize;
    let mut linesearch_error = None;
    let termination = loop {
        if g.norm2() <= cfg.grad_tol {
            break TerminationReason::Converged;
        }
        if iterations >= cfg.max_iters {
            break TerminationReason::MaxIters;
        }

        let dir = m.mat_vec(&g)?.scale(-1.0);
        let (ls, fallback) = match backtrack(obj, &x, &dir, f, &g, &cfg.linesearch) {
            Ok(ls) => (ls, None),
            // Wolfe's curvature condition can be unreachable by pure
            // backtracking; keep the run alive on the recorded best
            // sufficient-decrease step.
            Err(LineSearchError::WolfeInfeasibleByBacktracking { best_armijo }) => {
                (*best_armijo, Some(LsFallback::Wolfe))
            }
            // Likewise when the halving grid steps over the Goldstein
            // window: the bracketing trial below it still decreases f
            // sufficiently.
            Err(LineSearchError::GoldsteinWindowMissed { below, .. }) => {
                (*below, Some(LsFallback::Goldstein))
            }
            Err(err) => {
                linesearch_error = Some(err);
                break TerminationReason::LinesearchFailure;
            }
        };
        f_evals += ls.f_evals;
        g_evals += ls.g_evals;

        let d = dir.scale(ls.step);
        let x_next = x.add_scaled(ls.step, &dir)?;
        let f_next = ls.f_new;
        let g_next = ls.g_new;
        check_finite(f_next, &g_next, iterations + 1, &x_next)?;

        let h = g_next.sub(&g)?;
        let (c_value, y, branch) = match cfg.update {
            UpdateRule::Bfgs => (0.0, h, UpdateApplied::BfgsBranch),
            UpdateRule::Mbfgs => {
                let c = compute_c(f, f_next, &g, &g_next, &d)?;
                // On an exactly quadratic stretch C cancels to roundoff
                // rather than to zero; gate the C > 0 branch on the scale
                // of the cancelled terms so BFGS and MBFGS stay bit-equal
                // there.
                let c_scale =
                    2.0 * (f.abs() + f_next.abs()) + g.dot(&d)?.abs() + g_next.dot(&d)?.abs();
                if c > C_BRANCH_RELATIVE_TOL * c_scale {
                    let y = modified_y(&h, &d, c).map_err(|e| match e {
                        UpdateError::Numerics(n) => SolverError::Numerics(n),
                        // d = a·p with a > 0 and p ≠ 0, so ‖d‖ > 0 here.
                        _ => SolverError::BadConfig("degenerate accepted step".into()),
                    })?;
                    (c, y, UpdateApplied::MbfgsBranch)
                } else {
                    (c, h, UpdateApplied::BfgsBranch)
                }
            }
        };

        let update_applied = match inverse_update(&m, &d, &y, cfg.curvature_skip_tol) {
            Ok(next) => {
                m = next;
                branch
            }
            Err(UpdateError::CurvatureSkipped { .. }) => UpdateApplied::Skipped,
            Err(UpdateError::Numerics(n)) => return Err(SolverError::Numerics(n)),
            Err(other) => {
                return Err(SolverError::BadConfig(format!(
                    "unexpected update failure: {other}"
                )))
            }
        };

        iterations += 1;
        if cfg.record_trace {
            trace.push(IterationRecord {
                k: iterations,
                x: x_next.clone(),
                f: f_next,
                grad_norm: g_next.norm2(),
                step: ls.step,
                backtracks: ls.backtracks,
                c_value,
                update_applied,
                f_evals,
                g_evals,
                fallback,
            });
        }
        x = x_next;
        f = f_next;
        g = g_next;
    };

    Ok(SolverResult {
        grad_norm_final: g.norm2(),
        x_final: x,
        f_final: f,
        iterations,
        termination,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        trace,
        total_f_evals: f_evals,
        total_g_evals: g_evals,
        linesearch_error,
    })
}

fn check_finite(
    f: f64,
    g: &DenseVector,
    iteration: usize,
    x: &DenseVector,
) -> Result<(), SolverError> {
    if !f.is_finite() {
        return Err(SolverError::NonFinite {
            iteration,
            what: "function value",
            x: x.clone(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            iteration,
            what: "gradient",
            x: x.clone(),
        });
    }
    Ok(())
}
