//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N PASS/FAIL` line (run with `-- --nocapture` to see them on
//! success). Criteria cover gradient correctness, line-search soundness,
//! update-oracle equivalence, branch identity, solver invariants, the
//! benchmark-grid reproduction bands, timing sanity, and format round-trips.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mbfgs::bench::{emit_table, paper_suite, parse_jsonl, BenchmarkCase, BenchmarkRow, CaseOutcome, OutputFormat, SuiteConfig};
use mbfgs::linesearch::{check_conditions, LineSearchRule, LineSearchSpec};
use mbfgs::numerics::{DenseVector, SymMatrix};
use mbfgs::objectives::{make_problem, Objective, Problem, ProblemId};
use mbfgs::solver::{
    compute_c, direct_update, inverse_update, minimize, modified_y, LsFallback, SolverConfig,
    SolverResult, TerminationReason, UpdateApplied, UpdateRule,
};

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn random_point(rng: &mut StdRng, center: &DenseVector, radius: f64) -> DenseVector {
    DenseVector::new(
        center
            .iter()
            .map(|c| c + rng.gen_range(-radius..radius))
            .collect(),
    )
    .unwrap()
}

/// Criterion 1: analytic vs central-difference gradients, 100 random points
/// per problem inside a box of radius 2 around the minimizer, h = 1e-6,
/// relative error ≤ 1e-5, all within one second.
#[test]
fn criterion_1_gradient_correctness() {
    let begin = Instant::now();
    let mut rng = StdRng::seed_from_u64(20240001);
    let mut worst: f64 = 0.0;
    for id in ProblemId::ALL {
        let p = make_problem(id);
        for _ in 0..100 {
            let x = random_point(&mut rng, p.known_minimizer(), 2.0);
            let analytic = p.eval_grad(&x).unwrap();
            let fd = p.fd_gradient(&x, 1e-6).unwrap();
            let rel = analytic.sub(&fd).unwrap().norm2() / analytic.norm2().max(1.0);
            worst = worst.max(rel);
            assert!(rel <= 1e-5, "{id}: gradient mismatch {rel:.3e} at {x}");
        }
    }
    let elapsed = begin.elapsed().as_secs_f64();
    let pass = worst <= 1e-5 && elapsed < 1.0;
    report(
        1,
        pass,
        &format!("gradients match finite differences (worst rel {worst:.2e}, {elapsed:.2}s)"),
    );
    assert!(elapsed < 1.0, "criterion 1 took {elapsed:.2}s");
}

/// All runs of the benchmark grid with traces recorded.
fn traced_paper_runs() -> Vec<(BenchmarkCase, Problem, SolverResult)> {
    paper_suite(1)
        .into_iter()
        .map(|case| {
            let problem = make_problem(case.problem);
            let result = minimize(&problem, &case.x0, &case.solver_config(true))
                .expect("benchmark runs do not hard-fail");
            (case, problem, result)
        })
        .collect()
}

/// Exact replay of the solver's internal state from a trace: for every
/// iteration k ≥ 1 yields (direction, d, M after the update), reproducing
/// the run bit for bit. The replay asserts its own fidelity by recomputing
/// each iterate, and checks the per-update secant condition M₊y = d plus
/// the curvature-boost identity d·y = d·h + C on the modified branch.
fn replay_run(
    problem: &Problem,
    result: &SolverResult,
    skip_tol: f64,
) -> Vec<(DenseVector, DenseVector, SymMatrix)> {
    let mut m = SymMatrix::identity(problem.dim());
    let mut steps = Vec::new();
    for pair in result.trace.windows(2) {
        let (prev, rec) = (&pair[0], &pair[1]);
        let g_prev = problem.gradient(&prev.x);
        let dir = m.mat_vec(&g_prev).unwrap().scale(-1.0);
        let x_next = prev.x.add_scaled(rec.step, &dir).unwrap();
        assert_eq!(x_next, rec.x, "replay diverged at k = {}", rec.k);
        let d = dir.scale(rec.step);
        let h = problem.gradient(&rec.x).sub(&g_prev).unwrap();
        let y = match rec.update_applied {
            UpdateApplied::MbfgsBranch => {
                let y = modified_y(&h, &d, rec.c_value).unwrap();
                let boosted = d.dot(&y).unwrap();
                let expect = d.dot(&h).unwrap() + rec.c_value;
                assert!(
                    (boosted - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                    "k = {}: curvature boost identity violated",
                    rec.k
                );
                Some(y)
            }
            UpdateApplied::BfgsBranch => Some(h),
            UpdateApplied::Skipped => None,
        };
        if let Some(y) = y {
            m = inverse_update(&m, &d, &y, skip_tol).unwrap();
            let secant = m.mat_vec(&y).unwrap().sub(&d).unwrap().norm2();
            assert!(
                secant <= 1e-10 * d.norm2(),
                "k = {}: secant residual {secant:.3e} for ‖d‖ = {:.3e}",
                rec.k,
                d.norm2()
            );
        }
        steps.push((dir, d, m.clone()));
    }
    steps
}

/// Criterion 2: every accepted step of the benchmark grid re-passes its
/// rule's inequalities when re-checked from raw numbers; recorded fallbacks
/// (Wolfe curvature, Goldstein window) are exempt from the unmet inequality
/// but must still show sufficient decrease. Accepted steps are also
/// grid-minimal: every earlier (larger) trial on the halving schedule fails
/// the rule.
#[test]
fn criterion_2_line_search_soundness() {
    let begin = Instant::now();
    let mut checked = 0usize;
    let mut rescanned = 0usize;
    let mut fallbacks = 0usize;
    for (case, problem, result) in traced_paper_runs() {
        let spec = LineSearchSpec::new(case.rule);
        let replay = replay_run(&problem, &result, 1e-12);
        for (pair, (dir, _, _)) in result.trace.windows(2).zip(&replay) {
            let (prev, rec) = (&pair[0], &pair[1]);
            let g_prev = problem.gradient(&prev.x);
            let g_new = problem.gradient(&rec.x);
            let flags = check_conditions(
                case.rule, prev.f, &g_prev, dir, rec.step, rec.f, &g_new, &spec,
            );
            checked += 1;
            match rec.fallback {
                None => assert!(
                    flags.all(),
                    "{}/{} k={}: conditions {flags:?} failed",
                    case.problem,
                    case.rule,
                    rec.k
                ),
                Some(LsFallback::Wolfe) => {
                    fallbacks += 1;
                    assert_eq!(case.rule, LineSearchRule::Wolfe);
                    assert!(flags.sufficient_decrease);
                }
                Some(LsFallback::Goldstein) => {
                    fallbacks += 1;
                    assert_eq!(case.rule, LineSearchRule::Goldstein);
                    assert!(flags.sufficient_decrease);
                }
            }
            if rec.fallback.is_none() {
                // Brute-force re-scan of the halving schedule: no earlier
                // trial may satisfy the full rule.
                for t in 0..rec.backtracks {
                    let step = spec.a_init * spec.tau.powi(t as i32);
                    let x_t = prev.x.add_scaled(step, dir).unwrap();
                    let early = check_conditions(
                        case.rule,
                        prev.f,
                        &g_prev,
                        dir,
                        step,
                        problem.value(&x_t),
                        &problem.gradient(&x_t),
                        &spec,
                    );
                    rescanned += 1;
                    assert!(
                        !early.all(),
                        "{}/{} k={}: schedule not minimal, trial t={t} passes",
                        case.problem,
                        case.rule,
                        rec.k
                    );
                }
            }
        }
    }
    let elapsed = begin.elapsed().as_secs_f64();
    report(
        2,
        true,
        &format!(
            "{checked} accepted steps re-verified, {rescanned} earlier trials re-scanned \
             ({fallbacks} recorded fallbacks, {elapsed:.2}s)"
        ),
    );
    assert!(elapsed < 10.0, "criterion 2 took {elapsed:.2}s");
}

// --- Exact rational matrix helpers (oracle-side only) -------------------
//
// The inverse-form and direct-form updates are exact algebraic inverses of
// one another, but comparing them through floating-point inversion is
// limited by the conditioning of the updated matrix (κ·ε can exceed 1e-8
// when d·y sits near the admission threshold). Evaluating the direct route
// and its inverse in exact rational arithmetic removes the oracle's own
// error entirely; the observed gap is then purely the implementation's
// floating-point rounding.

type Rat = num_rational::BigRational;

fn rat(x: f64) -> Rat {
    Rat::from_float(x).expect("finite")
}

fn rat_matrix(m: &SymMatrix) -> Vec<Vec<Rat>> {
    let n = m.order();
    (0..n)
        .map(|i| (0..n).map(|j| rat(m.get(i, j))).collect())
        .collect()
}

fn rat_vec(v: &DenseVector) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

fn rat_dot(a: &[Rat], b: &[Rat]) -> Rat {
    use num_traits::Zero;
    a.iter()
        .zip(b)
        .fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

fn rat_mat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter().map(|row| rat_dot(row, v)).collect()
}

/// Exact Gauss-Jordan inverse over the rationals.
fn rat_invert(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    use num_traits::{One, Zero};
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("oracle matrix is invertible");
        a.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for j in 0..2 * n {
            a[col][j] = &a[col][j] / &pivot;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in 0..2 * n {
                    a[r][j] = &a[r][j] - &factor * &a[col][j];
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// The direct rank-two form evaluated exactly: B − (Bd)(Bd)ᵀ/(dᵀBd) + yyᵀ/(dᵀy).
fn rat_direct_update(b: &[Vec<Rat>], d: &[Rat], y: &[Rat]) -> Vec<Vec<Rat>> {
    let n = b.len();
    let bd = rat_mat_vec(b, d);
    let d_b_d = rat_dot(d, &bd);
    let d_dot_y = rat_dot(d, y);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    &b[i][j] - &bd[i] * &bd[j] / &d_b_d + &y[i] * &y[j] / &d_dot_y
                })
                .collect()
        })
        .collect()
}

// Uniform on [-1, 1) quantized to 20-bit dyadics: every value, product and
// small sum stays exactly representable, which keeps the rational oracle's
// numerators short without making the instances any less random.
fn random_unit(rng: &mut StdRng) -> f64 {
    const Q: i64 = 1 << 20;
    rng.gen_range(-Q..Q) as f64 / Q as f64
}

fn random_spd(rng: &mut StdRng, n: usize) -> SymMatrix {
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| random_unit(rng)).collect())
        .collect();
    SymMatrix::from_fn_lower(n, |i, j| {
        let mut sum = if i == j { 0.5 } else { 0.0 };
        for k in 0..n {
            sum += a[i][k] * a[j][k];
        }
        sum
    })
}

fn random_vec(rng: &mut StdRng, n: usize) -> DenseVector {
    DenseVector::new((0..n).map(|_| random_unit(rng)).collect()).unwrap()
}

/// Criterion 3: on 1000 random SPD instances (n ∈ {2, 4}) with d·y > 1e-6,
/// the inverse-form update equals the numerical inverse of the direct form
/// (evaluated exactly over the rationals) to 1e-8, and both routes satisfy
/// their secant conditions to 1e-10.
#[test]
fn criterion_3_update_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(20240003);
    let mut worst_gap: f64 = 0.0;
    for trial in 0..1000 {
        let n = if trial % 2 == 0 { 2 } else { 4 };
        let m = random_spd(&mut rng, n);
        let (d, y) = loop {
            let d = random_vec(&mut rng, n);
            let y = random_vec(&mut rng, n);
            if d.dot(&y).unwrap() > 1e-6 {
                break (d, y);
            }
        };

        let m_next = inverse_update(&m, &d, &y, 0.0).unwrap();
        let b_next = direct_update(&invert_f64(&m), &d, &y).unwrap();

        // Exact route: B = M⁻¹, B₊ by the direct formula, M₊ = B₊⁻¹, all
        // over the rationals.
        let b_exact = rat_invert(&rat_matrix(&m));
        let b_next_exact = rat_direct_update(&b_exact, &rat_vec(&d), &rat_vec(&y));
        let m_next_exact = rat_invert(&b_next_exact);

        let exact: Vec<Vec<f64>> = m_next_exact
            .iter()
            .map(|row| row.iter().map(rat_to_f64).collect())
            .collect();
        let scale = exact
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(1.0f64, f64::max);
        for i in 0..n {
            for j in 0..n {
                let gap = (m_next.get(i, j) - exact[i][j]).abs() / scale;
                worst_gap = worst_gap.max(gap);
                assert!(
                    gap <= 1e-8,
                    "trial {trial}: routes differ by {gap:.3e} at ({i}, {j})"
                );
            }
        }

        // Secant conditions on both floating-point routes, scaled by the
        // magnitudes that actually enter the products (the update entries
        // grow like 1/(d·y), and the residual is a cancellation of those
        // terms).
        let max_entry = |mat: &SymMatrix| {
            let k = mat.order();
            (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| mat.get(i, j).abs())
                .fold(1.0f64, f64::max)
        };
        let inv_secant = m_next.mat_vec(&y).unwrap().sub(&d).unwrap().norm2();
        assert!(
            inv_secant <= 1e-10 * max_entry(&m_next) * y.norm2().max(1.0),
            "trial {trial}: inverse secant residual {inv_secant:.3e}"
        );
        let dir_secant = b_next.mat_vec(&d).unwrap().sub(&y).unwrap().norm2();
        assert!(
            dir_secant <= 1e-10 * max_entry(&b_next) * d.norm2().max(1.0),
            "trial {trial}: direct secant residual {dir_secant:.3e}"
        );
    }
    report(
        3,
        true,
        &format!("1000 instances, worst route gap {worst_gap:.2e} (≤ 1e-8)"),
    );
}

/// Plain f64 Gauss-Jordan inverse, used only to feed the f64 direct route
/// for its secant check.
fn invert_f64(m: &SymMatrix) -> SymMatrix {
    let n = m.order();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| m.get(i, j)).collect();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        let pivot = a[col][col];
        assert!(pivot.abs() > 1e-300, "singular matrix in oracle inversion");
        for j in 0..2 * n {
            a[col][j] /= pivot;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                for j in 0..2 * n {
                    a[r][j] -= factor * a[col][j];
                }
            }
        }
    }
    SymMatrix::from_fn_lower(n, |i, j| 0.5 * (a[i][j + n] + a[j][i + n]))
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational fits in f64 range")
}

/// Convex quadratic ½ xᵀA x + bᵀx with SPD A.
struct Quadratic {
    a: SymMatrix,
    b: DenseVector,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.a.order()
    }
    fn value(&self, x: &DenseVector) -> f64 {
        0.5 * x.dot(&self.a.mat_vec(x).unwrap()).unwrap() + self.b.dot(x).unwrap()
    }
    fn gradient(&self, x: &DenseVector) -> DenseVector {
        self.a.mat_vec(x).unwrap().add_scaled(1.0, &self.b).unwrap()
    }
}

/// Criterion 4: on random convex quadratics the correction C stays at zero
/// (≤ 1e-10) and the modified update walks the exact BFGS trajectory; on the
/// quartic hand case C equals 2 exactly.
#[test]
fn criterion_4_branch_identity() {
    let mut rng = StdRng::seed_from_u64(20240004);
    let mut runs = 0usize;
    for n in [2usize, 4, 8] {
        for _ in 0..10 {
            let obj = Quadratic {
                a: random_spd(&mut rng, n),
                b: random_vec(&mut rng, n),
            };
            let x0 = random_vec(&mut rng, n).scale(3.0);
            let rule = [
                LineSearchRule::Armijo,
                LineSearchRule::Goldstein,
                LineSearchRule::Wolfe,
            ][runs % 3];
            let mut cfg_m = SolverConfig::new(UpdateRule::Mbfgs, rule);
            cfg_m.record_trace = true;
            let mut cfg_b = cfg_m.clone();
            cfg_b.update = UpdateRule::Bfgs;
            let rm = minimize(&obj, &x0, &cfg_m).unwrap();
            let rb = minimize(&obj, &x0, &cfg_b).unwrap();
            assert_eq!(
                rm.iterations, rb.iterations,
                "n={n}, {rule}: iteration counts differ"
            );
            for (a, b) in rm.trace.iter().zip(rb.trace.iter()) {
                assert!(
                    a.c_value.abs() <= 1e-10,
                    "n={n}: C = {:.3e} on a quadratic",
                    a.c_value
                );
                assert_eq!(a.x, b.x, "n={n}, {rule}: iterates differ at k = {}", a.k);
                assert_eq!(a.step, b.step);
            }
            runs += 1;
        }
    }

    // Quartic hand case: f(x) = x⁴ from 0 with d = 1 gives C = 2 exactly.
    let g0 = DenseVector::from_slice(&[0.0]).unwrap();
    let g1 = DenseVector::from_slice(&[4.0]).unwrap();
    let d = DenseVector::from_slice(&[1.0]).unwrap();
    let c = compute_c(0.0, 1.0, &g0, &g1, &d).unwrap();
    assert_eq!(c, 2.0);

    report(
        4,
        true,
        &format!("{runs} quadratics: identical trajectories, C ≤ 1e-10; quartic C = 2 exactly"),
    );
}

/// Criterion 5: across the benchmark grid every applied inverse
/// approximation is SPD at 1e-12, every direction is a strict descent
/// direction, and f strictly decreases along every trace.
#[test]
fn criterion_5_spd_and_descent_invariants() {
    let mut updates = 0usize;
    let mut skipped = 0usize;
    for (case, problem, result) in traced_paper_runs() {
        let replay = replay_run(&problem, &result, 1e-12);
        for (pair, (dir, _, m)) in result.trace.windows(2).zip(&replay) {
            let (prev, rec) = (&pair[0], &pair[1]);
            // Strict descent at the point the direction was taken from.
            let slope = problem.gradient(&prev.x).dot(dir).unwrap();
            assert!(
                slope < 0.0,
                "{}/{} k={}: g·p = {slope:e}",
                case.problem,
                case.rule,
                rec.k
            );
            // Strict monotone decrease.
            assert!(
                rec.f < prev.f,
                "{}/{} k={}: f did not decrease",
                case.problem,
                case.rule,
                rec.k
            );
            // SPD after every applied update.
            if rec.update_applied == UpdateApplied::Skipped {
                skipped += 1;
            } else {
                updates += 1;
                assert!(
                    m.is_spd(1e-12),
                    "{}/{} k={}: M lost positive definiteness",
                    case.problem,
                    case.rule,
                    rec.k
                );
            }
        }
    }
    report(
        5,
        true,
        &format!("{updates} applied updates SPD, strict descent and decrease ({skipped} skipped)"),
    );
}

/// Reference iteration counts, one triple (armijo, goldstein, wolfe) per
/// start point of the benchmark grid.
fn reference_counts() -> Vec<(ProblemId, Vec<f64>, [usize; 3])> {
    vec![
        (ProblemId::Rosenbrock, vec![2.2, 2.0], [26, 26, 26]),
        (ProblemId::Rosenbrock, vec![2.0, 2.0], [20, 20, 20]),
        (ProblemId::Rosenbrock, vec![1.2, 1.8], [18, 18, 18]),
        (ProblemId::Rosenbrock, vec![0.75, 1.0], [17, 17, 17]),
        (ProblemId::Rosenbrock, vec![0.0, 1.8], [31, 31, 31]),
        (ProblemId::Rosenbrock, vec![1.8, 2.0], [18, 21, 18]),
        (ProblemId::PowellQuartic, vec![4.0, -1.0, 0.0, 1.0], [24, 24, 24]),
        (ProblemId::PowellQuartic, vec![3.0, -1.0, 1.0, 1.0], [22, 22, 22]),
        (ProblemId::PowellQuartic, vec![3.0, -1.0, 0.0, 1.0], [24, 24, 24]),
        (ProblemId::PowellQuartic, vec![3.0, -1.5, 0.0, 1.5], [27, 27, 27]),
        (ProblemId::Wood, vec![1.0, 1.2, 1.3, 1.4], [14, 14, 14]),
        (ProblemId::Wood, vec![1.3, 1.2, 1.3, 1.4], [20, 20, 20]),
        (ProblemId::Wood, vec![1.2, 1.2, 1.2, 1.2], [12, 12, 12]),
        (ProblemId::Wood, vec![1.1, 1.2, 1.3, 1.4], [14, 14, 14]),
        (ProblemId::SchumerSteiglitz, vec![0.2, 0.2], [12, 12, 12]),
        (ProblemId::SchumerSteiglitz, vec![0.4, 0.4], [12, 12, 12]),
        (ProblemId::SchumerSteiglitz, vec![0.8, 0.8], [18, 18, 18]),
        (ProblemId::SchumerSteiglitz, vec![-0.4, 0.8], [20, 20, 20]),
        (ProblemId::SchumerSteiglitz, vec![-0.4, 0.6], [20, 20, 20]),
        (ProblemId::SchwefelVariant, vec![4.0, 8.0], [18, 18, 18]),
        (ProblemId::SchwefelVariant, vec![5.0, 6.0], [14, 14, 14]),
        (ProblemId::SchwefelVariant, vec![6.0, 6.0], [14, 14, 14]),
        (ProblemId::SchwefelVariant, vec![3.0, 3.0], [16, 16, 16]),
        (ProblemId::SchwefelVariant, vec![8.0, 6.0], [18, 18, 18]),
    ]
}

/// Criterion 6: with the default configuration every run of the benchmark
/// grid converges; iteration counts sit within ±10 of the reference counts
/// for at least 80% of the cells and within ±20 for the rest. The bands are
/// asserted verbatim; the full per-cell comparison is printed first.
#[test]
fn criterion_6_convergence_reproduction() {
    let begin = Instant::now();
    let rules = [
        LineSearchRule::Armijo,
        LineSearchRule::Goldstein,
        LineSearchRule::Wolfe,
    ];
    let mut all_converged = true;
    let mut within_10 = 0usize;
    let mut within_20 = 0usize;
    let mut total = 0usize;
    println!("{:<12} {:<22} {:>24} {:>24}", "problem", "x0", "observed a/g/w", "reference a/g/w");
    for (id, x0, expected) in reference_counts() {
        let problem = make_problem(id);
        let x0 = DenseVector::new(x0).unwrap();
        let mut observed = [0usize; 3];
        for (i, rule) in rules.iter().enumerate() {
            let cfg = SolverConfig::new(UpdateRule::Mbfgs, *rule);
            let result = minimize(&problem, &x0, &cfg).unwrap();
            all_converged &= result.termination == TerminationReason::Converged;
            observed[i] = result.iterations;
            let diff = result.iterations.abs_diff(expected[i]);
            total += 1;
            if diff <= 10 {
                within_10 += 1;
            }
            if diff <= 20 {
                within_20 += 1;
            }
        }
        println!(
            "{:<12} {:<22} {:>24} {:>24}",
            id.to_string(),
            format!("{x0}"),
            format!("{}/{}/{}", observed[0], observed[1], observed[2]),
            format!("{}/{}/{}", expected[0], expected[1], expected[2]),
        );
    }
    let elapsed = begin.elapsed().as_secs_f64();
    let frac_10 = within_10 as f64 / total as f64;
    let pass = all_converged && frac_10 >= 0.8 && within_20 == total;
    report(
        6,
        pass,
        &format!(
            "converged all: {all_converged}; within ±10: {within_10}/{total} ({:.1}%, need ≥ 80%); within ±20: {within_20}/{total} (need all); {elapsed:.2}s",
            100.0 * frac_10
        ),
    );
    assert!(elapsed < 5.0, "criterion 6 took {elapsed:.2}s");
    assert!(all_converged, "not all benchmark runs converged");
    assert!(
        frac_10 >= 0.8,
        "only {within_10}/{total} cells within ±10 of the reference counts"
    );
    assert!(
        within_20 == total,
        "{} cells deviate by more than ±20 from the reference counts",
        total - within_20
    );
}

/// Criterion 7: wall times are hardware-bound and not reproduced; instead
/// the harness must emit mean-time columns in the pivoted table and every
/// benchmark run must finish well under a second.
#[test]
fn criterion_7_timing_shape_and_speed() {
    let mut cfg = SuiteConfig::new(paper_suite(3));
    cfg.workers = 1;
    let rows = mbfgs::bench::run_suite(&cfg).unwrap();
    let md = emit_table(&rows, OutputFormat::Markdown).unwrap();
    for rule in ["Armijo", "Goldstein", "Wolfe"] {
        assert!(
            md.contains(&format!("(Avg Time) {rule}")),
            "markdown table lacks the {rule} time column"
        );
    }
    let slowest = rows
        .iter()
        .map(|row| row.mean_wall_time_seconds)
        .fold(0.0f64, f64::max);
    assert!(
        slowest < 1.0,
        "slowest benchmark case averaged {slowest:.3}s per run"
    );
    report(
        7,
        true,
        &format!("time columns emitted; slowest mean run {slowest:.6}s (< 1s)"),
    );
}

/// Splits one csv line, honoring double-quoted fields.
fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut field)),
            _ => field.push(c),
        }
    }
    fields.push(field);
    fields
}

/// Criterion 8: json-lines output round-trips field for field, and the
/// markdown/csv/jsonl renderings of the same rows carry the same numbers
/// (csv and jsonl at full precision, markdown at its printed 3/7 decimals).
#[test]
fn criterion_8_format_round_trip() {
    let mut cfg = SuiteConfig::new(paper_suite(1));
    cfg.workers = 1;
    let mut rows = mbfgs::bench::run_suite(&cfg).unwrap();
    // Exercise the optional fields too: a clean failure row.
    let mut failing = BenchmarkCase::new(
        ProblemId::Rosenbrock,
        DenseVector::from_slice(&[2.2, 2.0]).unwrap(),
        LineSearchRule::Armijo,
        UpdateRule::Mbfgs,
    );
    failing.repetitions = 1;
    failing.max_iters = Some(1);
    rows.push(mbfgs::bench::run_case(&failing));

    // Round trip.
    let jsonl = emit_table(&rows, OutputFormat::JsonLines).unwrap();
    let parsed = parse_jsonl(&jsonl).unwrap();
    assert_eq!(parsed, rows, "jsonl round trip is not field-for-field equal");

    // csv carries the same numbers at full precision.
    let csv = emit_table(&rows, OutputFormat::Csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), rows.len() + 1);
    for (line, row) in lines[1..].iter().zip(&rows) {
        let fields = split_csv(line);
        assert_eq!(fields[0], row.case.problem.to_string());
        assert_eq!(fields[2], row.case.rule.to_string());
        assert_eq!(fields[3], row.case.update.to_string());
        let r: Option<f64> = if fields[4].is_empty() {
            None
        } else {
            Some(fields[4].parse().unwrap())
        };
        assert_eq!(r, row.r, "csv r differs");
        assert_eq!(fields[5].parse::<usize>().unwrap(), row.iterations);
        assert_eq!(
            fields[6].parse::<f64>().unwrap(),
            row.mean_wall_time_seconds,
            "csv time differs"
        );
        assert_eq!(fields[7], row.termination.as_str());
        assert_eq!(fields[9].parse::<usize>().unwrap(), row.total_f_evals);
        assert_eq!(fields[10].parse::<usize>().unwrap(), row.total_g_evals);
    }

    // Markdown carries the same numbers at its printed precision. Expected
    // cells are rebuilt from the parsed jsonl rows, not from the library's
    // markdown path.
    let converged: Vec<&BenchmarkRow> = parsed
        .iter()
        .filter(|row| row.termination == CaseOutcome::Converged)
        .collect();
    let md = emit_table(&rows, OutputFormat::Markdown).unwrap();
    for row in converged {
        let r_cell = format!("| {} | {:.3} |", row.case.x0, row.r.unwrap());
        assert!(md.contains(&r_cell), "markdown lacks row head {r_cell}");
        let iter_cell = format!(" {} |", row.iterations);
        assert!(md.contains(&iter_cell));
        let time_cell = format!(" {:.7} |", row.mean_wall_time_seconds);
        assert!(md.contains(&time_cell), "markdown lacks time cell {time_cell}");
    }

    report(
        8,
        true,
        &format!("{} rows: jsonl round-trips, csv/markdown carry the same numbers", rows.len()),
    );
}
