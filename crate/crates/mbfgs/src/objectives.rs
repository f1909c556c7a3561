//! The five benchmark objectives, their analytic gradients, known
//! minimizers, and a central-difference gradient oracle for testing.

use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

use crate::numerics::{DenseVector, NumericsError};

/// Anything the solver can minimize: a smooth function with a gradient.
///
/// Callers must pass points of dimension `dim()`; implementations may panic
/// otherwise. [`crate::solver::minimize`] validates the start point once and
/// keeps dimensions consistent from there.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &DenseVector) -> f64;
    fn gradient(&self, x: &DenseVector) -> DenseVector;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown function '{0}' (expected rosenbrock, powell, wood, schumer or schwefel)")]
pub struct UnknownProblem(String);

/// Identifier of a benchmark problem. The `Display`/`FromStr` forms are the
/// CLI-visible strings: `rosenbrock`, `powell`, `wood`, `schumer`, `schwefel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemId {
    #[serde(rename = "rosenbrock")]
    Rosenbrock,
    #[serde(rename = "powell")]
    PowellQuartic,
    #[serde(rename = "wood")]
    Wood,
    #[serde(rename = "schumer")]
    SchumerSteiglitz,
    #[serde(rename = "schwefel")]
    SchwefelVariant,
}

impl ProblemId {
    pub const ALL: [ProblemId; 5] = [
        ProblemId::Rosenbrock,
        ProblemId::PowellQuartic,
        ProblemId::Wood,
        ProblemId::SchumerSteiglitz,
        ProblemId::SchwefelVariant,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Rosenbrock => "rosenbrock",
            ProblemId::PowellQuartic => "powell",
            ProblemId::Wood => "wood",
            ProblemId::SchumerSteiglitz => "schumer",
            ProblemId::SchwefelVariant => "schwefel",
        }
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = UnknownProblem;

    fn from_str(s: &str) -> Result<Self, UnknownProblem> {
        match s {
            "rosenbrock" => Ok(ProblemId::Rosenbrock),
            "powell" => Ok(ProblemId::PowellQuartic),
            "wood" => Ok(ProblemId::Wood),
            "schumer" => Ok(ProblemId::SchumerSteiglitz),
            "schwefel" => Ok(ProblemId::SchwefelVariant),
            other => Err(UnknownProblem(other.to_string())),
        }
    }
}

/// A benchmark problem: formula, analytic gradient, and known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    id: ProblemId,
    dim: usize,
    name: &'static str,
    known_minimizer: DenseVector,
    known_min_value: f64,
}

/// Builds the problem descriptor for `id`.
pub fn make_problem(id: ProblemId) -> Problem {
    let (dim, name, x_star) = match id {
        ProblemId::Rosenbrock => (2, "Rosenbrock", vec![1.0, 1.0]),
        ProblemId::PowellQuartic => (4, "Powell's quartic", vec![0.0, 0.0, 0.0, 0.0]),
        ProblemId::Wood => (4, "Wood", vec![1.0, 1.0, 1.0, 1.0]),
        ProblemId::SchumerSteiglitz => (2, "Schumer-Steiglitz", vec![0.0, 0.0]),
        ProblemId::SchwefelVariant => (2, "Schwefel", vec![1.0, 1.0]),
    };
    Problem {
        id,
        dim,
        name,
        known_minimizer: DenseVector::new(x_star).expect("minimizer entries are finite"),
        known_min_value: 0.0,
    }
}

impl Problem {
    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn known_minimizer(&self) -> &DenseVector {
        &self.known_minimizer
    }

    pub fn known_min_value(&self) -> f64 {
        self.known_min_value
    }

    fn check_dim(&self, x: &DenseVector) -> Result<(), ObjectiveError> {
        if x.dim() != self.dim {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            }
            .into());
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn eval_f(&self, x: &DenseVector) -> Result<f64, ObjectiveError> {
        self.check_dim(x)?;
        let v = match self.id {
            ProblemId::Rosenbrock => {
                // 100 (x2 - x1^2)^2 + (1 - x1)^2
                100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
            }
            ProblemId::PowellQuartic => {
                // (x1 + 10 x2)^2 + 5 (x3 - x4)^2 + (x2 - 2 x3)^4 + 10 (x1 - x4)^4
                (x[0] + 10.0 * x[1]).powi(2)
                    + 5.0 * (x[2] - x[3]).powi(2)
                    + (x[1] - 2.0 * x[2]).powi(4)
                    + 10.0 * (x[0] - x[3]).powi(4)
            }
            ProblemId::Wood => {
                // 100 (x1^2 - x2)^2 + (x1 - 1)^2 + (x3 - 1)^2 + 90 (x3^2 - x4)^2
                //   + 10.1 [(x2 - 1)^2 + (x4 - 1)^2] + 19.8 (x2 - 1)(x4 - 1)
                100.0 * (x[0] * x[0] - x[1]).powi(2)
                    + (x[0] - 1.0).powi(2)
                    + (x[2] - 1.0).powi(2)
                    + 90.0 * (x[2] * x[2] - x[3]).powi(2)
                    + 10.1 * ((x[1] - 1.0).powi(2) + (x[3] - 1.0).powi(2))
                    + 19.8 * (x[1] - 1.0) * (x[3] - 1.0)
            }
            ProblemId::SchumerSteiglitz => {
                // x1^4 + x2^4
                x[0].powi(4) + x[1].powi(4)
            }
            ProblemId::SchwefelVariant => {
                // (x1 - 1)^2 + (x2 - 1)^2 + (x1 - x2^2)^2
                (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2) + (x[0] - x[1] * x[1]).powi(2)
            }
        };
        Ok(v)
    }

    /// Analytic gradient of [`Problem::eval_f`] at `x`.
    pub fn eval_grad(&self, x: &DenseVector) -> Result<DenseVector, ObjectiveError> {
        self.check_dim(x)?;
        let g = match self.id {
            ProblemId::Rosenbrock => {
                let t = x[1] - x[0] * x[0];
                vec![-400.0 * x[0] * t - 2.0 * (1.0 - x[0]), 200.0 * t]
            }
            ProblemId::PowellQuartic => {
                let a = x[0] + 10.0 * x[1];
                let b = x[2] - x[3];
                let c = (x[1] - 2.0 * x[2]).powi(3);
                let d = (x[0] - x[3]).powi(3);
                vec![
                    2.0 * a + 40.0 * d,
                    20.0 * a + 4.0 * c,
                    10.0 * b - 8.0 * c,
                    -10.0 * b - 40.0 * d,
                ]
            }
            ProblemId::Wood => {
                let t1 = x[0] * x[0] - x[1];
                let t2 = x[2] * x[2] - x[3];
                vec![
                    400.0 * x[0] * t1 + 2.0 * (x[0] - 1.0),
                    -200.0 * t1 + 20.2 * (x[1] - 1.0) + 19.8 * (x[3] - 1.0),
                    2.0 * (x[2] - 1.0) + 360.0 * x[2] * t2,
                    -180.0 * t2 + 20.2 * (x[3] - 1.0) + 19.8 * (x[1] - 1.0),
                ]
            }
            ProblemId::SchumerSteiglitz => {
                vec![4.0 * x[0].powi(3), 4.0 * x[1].powi(3)]
            }
            ProblemId::SchwefelVariant => {
                let t = x[0] - x[1] * x[1];
                vec![2.0 * (x[0] - 1.0) + 2.0 * t, 2.0 * (x[1] - 1.0) - 4.0 * x[1] * t]
            }
        };
        Ok(DenseVector::new(g)?)
    }

    /// Central-difference gradient (f(x+h·eᵢ) − f(x−h·eᵢ))/(2h); the test
    /// oracle against which the analytic gradients are verified.
    pub fn fd_gradient(&self, x: &DenseVector, h: f64) -> Result<DenseVector, ObjectiveError> {
        self.check_dim(x)?;
        assert!(h > 0.0, "finite-difference step must be positive");
        let mut g = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut fwd = x.as_slice().to_vec();
            let mut bwd = fwd.clone();
            fwd[i] += h;
            bwd[i] -= h;
            let f_fwd = self.eval_f(&DenseVector::new(fwd)?)?;
            let f_bwd = self.eval_f(&DenseVector::new(bwd)?)?;
            g.push((f_fwd - f_bwd) / (2.0 * h));
        }
        Ok(DenseVector::new(g)?)
    }
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> f64 {
        self.eval_f(x).expect("dimension checked by caller")
    }

    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.eval_grad(x).expect("dimension checked by caller")
    }
}

/// Euclidean distance ‖x0 − x*‖ between a start point and the known
/// minimizer; the row key of the benchmark tables.
pub fn distance_r(x0: &DenseVector, x_star: &DenseVector) -> Result<f64, NumericsError> {
    Ok(x0.sub(x_star)?.norm2())
}
