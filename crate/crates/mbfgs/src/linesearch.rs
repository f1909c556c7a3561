//! Backtracking step-size rules: Armijo, Wolfe, and Goldstein, all driven by
//! the shared halving schedule a_{t+1} = τ·a_t, plus a post-hoc condition
//! verifier that re-checks acceptance from raw numbers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::DenseVector;
use crate::objectives::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineSearchRule {
    #[serde(rename = "armijo")]
    Armijo,
    #[serde(rename = "wolfe")]
    Wolfe,
    #[serde(rename = "goldstein")]
    Goldstein,
}

impl LineSearchRule {
    pub const ALL: [LineSearchRule; 3] = [
        LineSearchRule::Armijo,
        LineSearchRule::Goldstein,
        LineSearchRule::Wolfe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LineSearchRule::Armijo => "armijo",
            LineSearchRule::Wolfe => "wolfe",
            LineSearchRule::Goldstein => "goldstein",
        }
    }
}

impl std::fmt::Display for LineSearchRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LineSearchRule {
    type Err = LineSearchSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "armijo" => Ok(LineSearchRule::Armijo),
            "wolfe" => Ok(LineSearchRule::Wolfe),
            "goldstein" => Ok(LineSearchRule::Goldstein),
            other => Err(LineSearchSpecError::UnknownRule(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineSearchSpecError {
    #[error("unknown line-search rule '{0}' (expected armijo, wolfe or goldstein)")]
    UnknownRule(String),
    #[error("a_init must be positive, got {0}")]
    BadInitialStep(f64),
    #[error("tau must lie strictly inside (0, 1), got {0}")]
    BadTau(f64),
    #[error("{rule}: constant {name} = {value} outside {bounds}")]
    BadConstant {
        rule: LineSearchRule,
        name: &'static str,
        value: f64,
        bounds: &'static str,
    },
}

/// Rule selector and constants for one backtracking search.
///
/// `c1` is the sufficient-decrease constant for every rule (the Armijo β, the
/// Goldstein window constant); `c2` is the Wolfe curvature constant and is
/// ignored by the other two rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchSpec {
    pub rule: LineSearchRule,
    pub a_init: f64,
    pub tau: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_backtracks: u32,
}

impl LineSearchSpec {
    /// Textbook defaults per rule: a_init = 1, τ = 0.5, Armijo/Wolfe
    /// c1 = 1e-4, Wolfe c2 = 0.9, Goldstein c1 = 0.25, 60 halvings.
    pub fn new(rule: LineSearchRule) -> Self {
        let (c1, c2) = match rule {
            LineSearchRule::Armijo => (1e-4, 0.0),
            LineSearchRule::Wolfe => (1e-4, 0.9),
            LineSearchRule::Goldstein => (0.25, 0.0),
        };
        Self {
            rule,
            a_init: 1.0,
            tau: 0.5,
            c1,
            c2,
            max_backtracks: 60,
        }
    }

    pub fn validate(&self) -> Result<(), LineSearchSpecError> {
        if !(self.a_init > 0.0) || !self.a_init.is_finite() {
            return Err(LineSearchSpecError::BadInitialStep(self.a_init));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(LineSearchSpecError::BadTau(self.tau));
        }
        let bad = |name, value, bounds| LineSearchSpecError::BadConstant {
            rule: self.rule,
            name,
            value,
            bounds,
        };
        match self.rule {
            LineSearchRule::Armijo => {
                if !(self.c1 > 0.0 && self.c1 < 1.0) {
                    return Err(bad("c1", self.c1, "(0, 1)"));
                }
            }
            LineSearchRule::Wolfe => {
                if !(self.c1 > 0.0 && self.c1 < 1.0) {
                    return Err(bad("c1", self.c1, "(0, 1)"));
                }
                if !(self.c2 > self.c1 && self.c2 < 1.0) {
                    return Err(bad("c2", self.c2, "(c1, 1)"));
                }
            }
            LineSearchRule::Goldstein => {
                if !(self.c1 > 0.0 && self.c1 < 0.5) {
                    return Err(bad("c1", self.c1, "(0, 0.5)"));
                }
            }
        }
        Ok(())
    }
}

/// Which acceptance inequalities held for a step. `sufficient_decrease` is
/// the upper (Armijo-style) bound for every rule; `curvature` only applies
/// to Wolfe, `lower_bound` only to Goldstein.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionFlags {
    pub sufficient_decrease: bool,
    pub curvature: Option<bool>,
    pub lower_bound: Option<bool>,
}

impl ConditionFlags {
    pub fn all(&self) -> bool {
        self.sufficient_decrease
            && self.curvature.unwrap_or(true)
            && self.lower_bound.unwrap_or(true)
    }
}

/// An accepted step: a = a_init·τ^backtracks together with the function and
/// gradient values evaluated there and the evaluation counts of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub step: f64,
    pub backtracks: u32,
    pub f_new: f64,
    pub g_new: DenseVector,
    pub f_evals: usize,
    pub g_evals: usize,
    pub satisfied: ConditionFlags,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineSearchError {
    #[error("direction is not a descent direction: g·p = {slope}")]
    NotDescent { slope: f64 },
    #[error("no acceptable step within {max_backtracks} backtracks (last trial {last_step})")]
    BacktrackLimit { max_backtracks: u32, last_step: f64 },
    /// Pure backtracking can shrink past every curvature-feasible step; the
    /// best sufficient-decrease step found is carried so the caller can still
    /// make progress.
    #[error("curvature condition unreachable by backtracking (best Armijo step {})", best_armijo.step)]
    WolfeInfeasibleByBacktracking { best_armijo: Box<StepResult> },
    /// The τ-grid stepped over the Goldstein window: `above` is the last
    /// trial rejected by the upper bound, `below` the first trial under the
    /// lower bound. The below trial still satisfies the upper
    /// (sufficient-decrease) bound, so callers may use it as a fallback.
    #[error("Goldstein window missed between trial steps {above:?} and {}", below.step)]
    GoldsteinWindowMissed {
        above: Option<f64>,
        below: Box<StepResult>,
    },
}

struct Search<'a, O: Objective + ?Sized> {
    obj: &'a O,
    x: &'a DenseVector,
    dir: &'a DenseVector,
    f_x: f64,
    slope: f64, // g(x)·dir, negative for descent directions
    spec: &'a LineSearchSpec,
    f_evals: usize,
    g_evals: usize,
}

impl<'a, O: Objective + ?Sized> Search<'a, O> {
    fn begin(
        obj: &'a O,
        x: &'a DenseVector,
        dir: &'a DenseVector,
        f_x: f64,
        g_x: &DenseVector,
        spec: &'a LineSearchSpec,
    ) -> Result<Self, LineSearchError> {
        assert_eq!(x.dim(), dir.dim(), "point/direction dimension mismatch");
        assert_eq!(x.dim(), g_x.dim(), "point/gradient dimension mismatch");
        let slope = g_x.dot(dir).expect("dimensions checked above");
        if !(slope < 0.0) {
            return Err(LineSearchError::NotDescent { slope });
        }
        Ok(Self {
            obj,
            x,
            dir,
            f_x,
            slope,
            spec,
            f_evals: 0,
            g_evals: 0,
        })
    }

    fn point_at(&self, step: f64) -> DenseVector {
        self.x
            .add_scaled(step, self.dir)
            .expect("dimensions checked at begin")
    }

    fn f_at(&mut self, step: f64) -> f64 {
        self.f_evals += 1;
        self.obj.value(&self.point_at(step))
    }

    fn g_at(&mut self, step: f64) -> DenseVector {
        self.g_evals += 1;
        self.obj.gradient(&self.point_at(step))
    }

    fn sufficient_decrease(&self, step: f64, f_new: f64) -> bool {
        f_new <= self.f_x + step * self.spec.c1 * self.slope
    }

    fn accept(self, step: f64, backtracks: u32, f_new: f64, g_new: DenseVector, satisfied: ConditionFlags) -> StepResult {
        StepResult {
            step,
            backtracks,
            f_new,
            g_new,
            f_evals: self.f_evals,
            g_evals: self.g_evals,
            satisfied,
        }
    }
}

/// Backtracks until f(x + a·dir) ≤ f(x) + a·c1·g·dir.
pub fn armijo_backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &DenseVector,
    dir: &DenseVector,
    f_x: f64,
    g_x: &DenseVector,
    spec: &LineSearchSpec,
) -> Result<StepResult, LineSearchError> {
    let mut search = Search::begin(obj, x, dir, f_x, g_x, spec)?;
    let mut step = spec.a_init;
    for t in 0..=spec.max_backtracks {
        let f_new = search.f_at(step);
        if search.sufficient_decrease(step, f_new) {
            let g_new = search.g_at(step);
            let satisfied = ConditionFlags {
                sufficient_decrease: true,
                curvature: None,
                lower_bound: None,
            };
            return Ok(search.accept(step, t, f_new, g_new, satisfied));
        }
        step *= spec.tau;
    }
    Err(LineSearchError::BacktrackLimit {
        max_backtracks: spec.max_backtracks,
        last_step: step / spec.tau,
    })
}

/// Backtracks until both the sufficient-decrease and the curvature condition
/// g(x + a·dir)·dir ≥ c2·g(x)·dir hold.
pub fn wolfe_backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &DenseVector,
    dir: &DenseVector,
    f_x: f64,
    g_x: &DenseVector,
    spec: &LineSearchSpec,
) -> Result<StepResult, LineSearchError> {
    let mut search = Search::begin(obj, x, dir, f_x, g_x, spec)?;
    // Best sufficient-decrease-only trial seen so far (lowest f).
    let mut best_armijo: Option<(f64, u32, f64, DenseVector)> = None;
    let mut step = spec.a_init;
    for t in 0..=spec.max_backtracks {
        let f_new = search.f_at(step);
        if search.sufficient_decrease(step, f_new) {
            let g_new = search.g_at(step);
            let curvature_ok =
                g_new.dot(dir).expect("dimensions fixed") >= spec.c2 * search.slope;
            if curvature_ok {
                let satisfied = ConditionFlags {
                    sufficient_decrease: true,
                    curvature: Some(true),
                    lower_bound: None,
                };
                return Ok(search.accept(step, t, f_new, g_new, satisfied));
            }
            if best_armijo.as_ref().is_none_or(|(_, _, f, _)| f_new < *f) {
                best_armijo = Some((step, t, f_new, g_new));
            }
        }
        step *= spec.tau;
    }
    match best_armijo {
        Some((step, backtracks, f_new, g_new)) => {
            let satisfied = ConditionFlags {
                sufficient_decrease: true,
                curvature: Some(false),
                lower_bound: None,
            };
            Err(LineSearchError::WolfeInfeasibleByBacktracking {
                best_armijo: Box::new(search.accept(step, backtracks, f_new, g_new, satisfied)),
            })
        }
        None => Err(LineSearchError::BacktrackLimit {
            max_backtracks: spec.max_backtracks,
            last_step: step / spec.tau,
        }),
    }
}

/// Backtracks until the step lands in the Goldstein window
/// f(x) + (1−c1)·a·g·dir ≤ f(x + a·dir) ≤ f(x) + c1·a·g·dir.
pub fn goldstein_backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &DenseVector,
    dir: &DenseVector,
    f_x: f64,
    g_x: &DenseVector,
    spec: &LineSearchSpec,
) -> Result<StepResult, LineSearchError> {
    let mut search = Search::begin(obj, x, dir, f_x, g_x, spec)?;
    let mut last_above: Option<f64> = None;
    let mut step = spec.a_init;
    for t in 0..=spec.max_backtracks {
        let f_new = search.f_at(step);
        let upper_ok = search.sufficient_decrease(step, f_new);
        if !upper_ok {
            last_above = Some(step);
            step *= spec.tau;
            continue;
        }
        let lower_ok = f_new >= f_x + (1.0 - spec.c1) * step * search.slope;
        let g_new = search.g_at(step);
        if lower_ok {
            let satisfied = ConditionFlags {
                sufficient_decrease: true,
                curvature: None,
                lower_bound: Some(true),
            };
            return Ok(search.accept(step, t, f_new, g_new, satisfied));
        }
        // Upper bound holds but the lower does not: every later (smaller)
        // trial sits even deeper below the window, so the grid skipped it.
        let satisfied = ConditionFlags {
            sufficient_decrease: true,
            curvature: None,
            lower_bound: Some(false),
        };
        return Err(LineSearchError::GoldsteinWindowMissed {
            above: last_above,
            below: Box::new(search.accept(step, t, f_new, g_new, satisfied)),
        });
    }
    Err(LineSearchError::BacktrackLimit {
        max_backtracks: spec.max_backtracks,
        last_step: step / spec.tau,
    })
}

/// Runs the search selected by `spec.rule`.
pub fn backtrack<O: Objective + ?Sized>(
    obj: &O,
    x: &DenseVector,
    dir: &DenseVector,
    f_x: f64,
    g_x: &DenseVector,
    spec: &LineSearchSpec,
) -> Result<StepResult, LineSearchError> {
    match spec.rule {
        LineSearchRule::Armijo => armijo_backtrack(obj, x, dir, f_x, g_x, spec),
        LineSearchRule::Wolfe => wolfe_backtrack(obj, x, dir, f_x, g_x, spec),
        LineSearchRule::Goldstein => goldstein_backtrack(obj, x, dir, f_x, g_x, spec),
    }
}

/// Re-evaluates the acceptance inequalities from raw numbers only; used by
/// the test suite and the solver's trace checks. All bounds are inclusive.
#[allow(clippy::too_many_arguments)]
pub fn check_conditions(
    rule: LineSearchRule,
    f_x: f64,
    g_x: &DenseVector,
    dir: &DenseVector,
    step: f64,
    f_new: f64,
    g_new: &DenseVector,
    spec: &LineSearchSpec,
) -> ConditionFlags {
    let slope = g_x.dot(dir).expect("dimension mismatch in check_conditions");
    let sufficient_decrease = f_new <= f_x + step * spec.c1 * slope;
    match rule {
        LineSearchRule::Armijo => ConditionFlags {
            sufficient_decrease,
            curvature: None,
            lower_bound: None,
        },
        LineSearchRule::Wolfe => {
            let new_slope = g_new.dot(dir).expect("dimension mismatch in check_conditions");
            ConditionFlags {
                sufficient_decrease,
                curvature: Some(new_slope >= spec.c2 * slope),
                lower_bound: None,
            }
        }
        LineSearchRule::Goldstein => ConditionFlags {
            sufficient_decrease,
            curvature: None,
            lower_bound: Some(f_new >= f_x + (1.0 - spec.c1) * step * slope),
        },
    }
}
