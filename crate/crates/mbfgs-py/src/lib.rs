//! Python bindings: the benchmark problems, the solver, and the benchmark
//! table renderer, exposed as the `mbfgs_py` extension module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mbfgs::bench::{emit_table, paper_suite, run_suite, OutputFormat, SuiteConfig};
use mbfgs::{
    distance_r, make_problem, DenseVector, LineSearchRule, SolverConfig, UpdateRule,
};

fn to_vector(values: Vec<f64>) -> PyResult<DenseVector> {
    DenseVector::new(values).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// One of the five benchmark objectives with its analytic gradient and
/// known minimizer.
#[pyclass(name = "Problem")]
struct PyProblem {
    inner: mbfgs::Problem,
}

#[pymethods]
impl PyProblem {
    /// Problem("rosenbrock" | "powell" | "wood" | "schumer" | "schwefel")
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        let id = name
            .parse()
            .map_err(|e: mbfgs::UnknownProblem| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            inner: make_problem(id),
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn known_minimizer(&self) -> Vec<f64> {
        self.inner.known_minimizer().as_slice().to_vec()
    }

    /// Objective value at x.
    fn f(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner
            .eval_f(&to_vector(x)?)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Analytic gradient at x.
    fn grad(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .eval_grad(&to_vector(x)?)
            .map_err(|e| PyValueError::new_err(e.to_string()))?
            .as_slice()
            .to_vec())
    }

    /// Central-difference gradient at x with step h.
    #[pyo3(signature = (x, h = 1e-6))]
    fn fd_gradient(&self, x: Vec<f64>, h: f64) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .fd_gradient(&to_vector(x)?, h)
            .map_err(|e| PyValueError::new_err(e.to_string()))?
            .as_slice()
            .to_vec())
    }

    /// Euclidean distance from x0 to the known minimizer.
    fn distance_r(&self, x0: Vec<f64>) -> PyResult<f64> {
        distance_r(&to_vector(x0)?, self.inner.known_minimizer())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', dim={})", self.inner.id(), self.inner.dim())
    }
}

/// One recorded iteration of a solver run.
#[pyclass(name = "TraceRow")]
#[derive(Clone)]
struct PyTraceRow {
    #[pyo3(get)]
    k: usize,
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    f: f64,
    #[pyo3(get)]
    grad_norm: f64,
    #[pyo3(get)]
    step: f64,
    #[pyo3(get)]
    backtracks: u32,
    #[pyo3(get)]
    c_value: f64,
    #[pyo3(get)]
    update_applied: String,
    #[pyo3(get)]
    f_evals: usize,
    #[pyo3(get)]
    g_evals: usize,
}

/// Outcome of a solver run.
#[pyclass(name = "MinimizeResult")]
struct PyMinimizeResult {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    f: f64,
    #[pyo3(get)]
    grad_norm: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    termination: String,
    #[pyo3(get)]
    wall_time_seconds: f64,
    #[pyo3(get)]
    total_f_evals: usize,
    #[pyo3(get)]
    total_g_evals: usize,
    #[pyo3(get)]
    trace: Vec<PyTraceRow>,
}

#[pymethods]
impl PyMinimizeResult {
    fn __repr__(&self) -> String {
        format!(
            "MinimizeResult(termination='{}', iterations={}, f={:e})",
            self.termination, self.iterations, self.f
        )
    }
}

/// Minimize a benchmark problem from x0.
#[pyfunction]
#[pyo3(signature = (problem, x0, update = "mbfgs", linesearch = "armijo",
                    grad_tol = 1e-6, max_iters = 2000, record_trace = false))]
fn minimize(
    problem: &PyProblem,
    x0: Vec<f64>,
    update: &str,
    linesearch: &str,
    grad_tol: f64,
    max_iters: usize,
    record_trace: bool,
) -> PyResult<PyMinimizeResult> {
    let update: UpdateRule = update.parse().map_err(PyValueError::new_err)?;
    let rule: LineSearchRule = linesearch
        .parse()
        .map_err(|e: mbfgs::linesearch::LineSearchSpecError| PyValueError::new_err(e.to_string()))?;
    let mut cfg = SolverConfig::new(update, rule);
    cfg.grad_tol = grad_tol;
    cfg.max_iters = max_iters;
    cfg.record_trace = record_trace;
    let result = mbfgs::minimize(&problem.inner, &to_vector(x0)?, &cfg)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyMinimizeResult {
        x: result.x_final.as_slice().to_vec(),
        f: result.f_final,
        grad_norm: result.grad_norm_final,
        iterations: result.iterations,
        termination: result.termination.to_string(),
        wall_time_seconds: result.wall_time_seconds,
        total_f_evals: result.total_f_evals,
        total_g_evals: result.total_g_evals,
        trace: result
            .trace
            .iter()
            .map(|rec| PyTraceRow {
                k: rec.k,
                x: rec.x.as_slice().to_vec(),
                f: rec.f,
                grad_norm: rec.grad_norm,
                step: rec.step,
                backtracks: rec.backtracks,
                c_value: rec.c_value,
                update_applied: rec.update_applied.as_str().to_string(),
                f_evals: rec.f_evals,
                g_evals: rec.g_evals,
            })
            .collect(),
    })
}

/// Run the built-in benchmark grid and return the rendered table
/// ("md", "csv" or "jsonl").
#[pyfunction]
#[pyo3(signature = (reps = 1, format = "md", workers = 1))]
fn paper_table(reps: usize, format: &str, workers: usize) -> PyResult<String> {
    let format: OutputFormat = format.parse().map_err(PyValueError::new_err)?;
    let mut cfg = SuiteConfig::new(paper_suite(reps));
    cfg.workers = workers;
    let rows = run_suite(&cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    emit_table(&rows, format).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn mbfgs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyMinimizeResult>()?;
    m.add_class::<PyTraceRow>()?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(paper_table, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
