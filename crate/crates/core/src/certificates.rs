//! Convergence-rate bounds and a verifier that checks every recorded iterate
//! of a run against the bound of the matching theorem.

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    nesterov_extrapolate, prox_gradient_step, Algorithm, NesterovParams, Problem, RunRecord, StepSchedule,
    STEP_SLACK,
};
use crate::error::{Error, Result};
use crate::numkernel::{solve_linear, Vector};
use crate::objectives::{CompositeProblem, SmoothKind};

/// Default certificate slack, added to the optimum reference's residual.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Length of the high-precision optimum run.
pub const HIGH_PRECISION_ITER: usize = 100_000;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}

fn require_k(k: usize) -> Result<()> {
    require(k >= 1, || "bound is undefined at k = 0".into())
}

fn step_within(step: f64, limit: f64) -> bool {
    step > 0.0 && step <= limit * (1.0 + STEP_SLACK)
}

/// `R² / (2αk)`: gradient descent on a convex `L`-smooth function with
/// `0 < α ≤ 1/L`, certifying `f(x_k) − f*` for `k ≥ 1`.
pub fn gd_convex_bound(k: usize, alpha: f64, r: f64) -> Result<f64> {
    require_k(k)?;
    require(alpha > 0.0, || format!("step must be positive, got {alpha}"))?;
    Ok(r * r / (2.0 * alpha * k as f64))
}

/// Contraction factor `1 − α·2mL/(m+L)` of gradient descent on an
/// `m`-strongly convex, `L`-smooth function.
pub fn gd_strong_factor(alpha: f64, m: f64, l: f64) -> f64 {
    (1.0 - alpha * (2.0 * m * l / (m + l))).max(0.0)
}

/// `(1 − α·2mL/(m+L))^k · R²`, certifying `‖x_k − x*‖²` for `k ≥ 0`.
pub fn gd_strong_bound(k: usize, alpha: f64, m: f64, l: f64, r: f64) -> Result<f64> {
    require(m > 0.0 && m <= l, || format!("need 0 < m <= L, got m = {m}, L = {l}"))?;
    require(alpha > 0.0, || format!("step must be positive, got {alpha}"))?;
    if !step_within(alpha, 2.0 / (m + l)) {
        return Err(Error::Hypothesis(format!(
            "step {alpha} exceeds 2/(m+L) = {} (strongly convex gradient descent rate)",
            2.0 / (m + l)
        )));
    }
    Ok(gd_strong_factor(alpha, m, l).powi(k as i32) * r * r)
}

/// `(R² + G²·Σα_i²) / (2·Σα_i)` over the given steps `α_0..α_k`, certifying
/// the best value `min_{i≤k} f(x_i) − f*` of the subgradient method.
pub fn subgrad_bound(alphas: &[f64], g: f64, r: f64) -> Result<f64> {
    require(!alphas.is_empty(), || "step list is empty".into())?;
    require(alphas.iter().all(|&a| a > 0.0), || "steps must be positive".into())?;
    let sum: f64 = alphas.iter().sum();
    let sum_sq: f64 = alphas.iter().map(|a| a * a).sum();
    Ok((r * r + g * g * sum_sq) / (2.0 * sum))
}

/// `R² / (2kt)`: proximal gradient with `0 < t ≤ 1/L`, certifying
/// `ψ(x_k) − ψ*` for `k ≥ 1`.
pub fn proxgrad_bound(k: usize, t: f64, r: f64) -> Result<f64> {
    require_k(k)?;
    require(t > 0.0, || format!("step must be positive, got {t}"))?;
    Ok(r * r / (2.0 * k as f64 * t))
}

/// `2L·R² / (k+1)²`: accelerated methods with `t = 1/L`, certifying
/// `ψ(x_k) − ψ*` for `k ≥ 1`.
pub fn nesterov_bound(k: usize, l: f64, r: f64) -> Result<f64> {
    require_k(k)?;
    let k1 = (k + 1) as f64;
    Ok(2.0 * l * r * r / (k1 * k1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NesterovVariant {
    First,
    Second,
}

/// Whether `(1−γ_n)t_n/γ_n² ≤ t_{n−1}/γ_{n−1}²` holds for `n = 2..=N`
/// (first variant), or `(1−γ_{n+1})t_{n+1}/γ_{n+1}² ≤ t_n/γ_n²` for
/// `n = 1..=N` (second variant, whose weights start at index 1).
pub fn check_nesterov_hyperparams(params: &NesterovParams, variant: NesterovVariant, n_max: usize) -> bool {
    let ratio = |n: usize| (1.0 - params.gamma(n)) * params.t(n) / params.gamma(n).powi(2);
    let anchor = |n: usize| params.t(n) / params.gamma(n).powi(2);
    match variant {
        NesterovVariant::First => (2..=n_max).all(|n| ratio(n) <= anchor(n - 1)),
        NesterovVariant::Second => (1..=n_max).all(|n| ratio(n + 1) <= anchor(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumMethod {
    ClosedForm,
    NormalEquations,
    HighPrecisionRun,
}

/// Reference minimizer with an estimate of how far `f_star` may sit above
/// the true optimal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReference {
    pub x_star: Vector,
    pub f_star: f64,
    pub method: OptimumMethod,
    pub residual: f64,
}

impl OptimumReference {
    pub fn closed_form(x_star: Vector, f_star: f64) -> Self {
        Self {
            x_star,
            f_star,
            method: OptimumMethod::ClosedForm,
            residual: 0.0,
        }
    }
}

pub fn estimate_optimum(problem: Problem<'_>, method: OptimumMethod) -> Result<OptimumReference> {
    match method {
        OptimumMethod::ClosedForm => {
            let known = match problem {
                Problem::Smooth(f) => f.known_minimum(),
                Problem::Nonsmooth(g) => g.known_minimum(),
                Problem::Composite(_) => None,
            };
            let known = known.ok_or_else(|| {
                Error::InvalidArgument("problem carries no closed-form minimizer".into())
            })?;
            Ok(OptimumReference::closed_form(known.x_star.clone(), known.f_star))
        }
        OptimumMethod::NormalEquations => match problem {
            Problem::Smooth(f) => match f.kind() {
                SmoothKind::LeastSquares { a, b } => {
                    let rhs = a.matvec_t(b)?;
                    let x_star = solve_linear(&a.gram(), &rhs).map_err(|e| match e {
                        Error::RankDeficient(msg) => Error::RankDeficient(format!(
                            "{msg}; normal equations need full column rank, use a high-precision run"
                        )),
                        other => other,
                    })?;
                    let m = f.strong_convexity();
                    if m == 0.0 {
                        return Err(Error::RankDeficient(
                            "AᵀA is singular; use a high-precision run".into(),
                        ));
                    }
                    let residual = f.gradient(&x_star).norm2_sq() / (2.0 * m);
                    Ok(OptimumReference {
                        f_star: f.value(&x_star),
                        x_star,
                        method,
                        residual,
                    })
                }
                _ => Err(Error::InvalidArgument("normal equations need a least-squares objective".into())),
            },
            _ => Err(Error::InvalidArgument("normal equations need a least-squares objective".into())),
        },
        OptimumMethod::HighPrecisionRun => match problem {
            Problem::Composite(p) => high_precision_run(p),
            _ => Err(Error::InvalidArgument("high-precision runs need a composite problem".into())),
        },
    }
}

/// Runs the first accelerated variant from the origin for
/// [`HIGH_PRECISION_ITER`] steps and keeps the best iterate. The residual is
/// the accelerated bound at the last index, with `R` estimated from the
/// returned point.
fn high_precision_run(p: &CompositeProblem) -> Result<OptimumReference> {
    let l = p.smooth().lipschitz();
    let params = NesterovParams::first(l);
    let t = params.t(0);
    let x0 = Vector::zeros(p.dim());
    let (mut x_prev, mut x) = (x0.clone(), prox_gradient_step(p, &x0, t)?);
    let (f0, f1) = (p.value(&x0), p.value(&x));
    let (mut best_x, mut best_value) = if f1 <= f0 { (x.clone(), f1) } else { (x0.clone(), f0) };
    for k in 1..HIGH_PRECISION_ITER {
        let y = nesterov_extrapolate(&params, k, &x, &x_prev);
        let next = prox_gradient_step(p, &y, t)?;
        next.ensure_finite()?;
        x_prev = std::mem::replace(&mut x, next);
        let value = p.value(&x);
        if value < best_value {
            best_value = value;
            best_x = x.clone();
        }
    }
    let r = best_x.sub(&x0).norm2();
    Ok(OptimumReference {
        residual: nesterov_bound(HIGH_PRECISION_ITER, l, r)?,
        x_star: best_x,
        f_star: best_value,
        method: OptimumMethod::HighPrecisionRun,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    GdConvex,
    GdStrong,
    Subgrad,
    ProxGrad,
    NesterovFirst,
    NesterovSecond,
}

impl TheoremId {
    /// The certificate that applies to a run of `algorithm` by default.
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::GradientDescent => TheoremId::GdConvex,
            Algorithm::Subgradient => TheoremId::Subgrad,
            Algorithm::ProximalGradient => TheoremId::ProxGrad,
            Algorithm::NesterovFirst => TheoremId::NesterovFirst,
            Algorithm::NesterovSecond => TheoremId::NesterovSecond,
        }
    }

    fn algorithm(self) -> Algorithm {
        match self {
            TheoremId::GdConvex | TheoremId::GdStrong => Algorithm::GradientDescent,
            TheoremId::Subgrad => Algorithm::Subgradient,
            TheoremId::ProxGrad => Algorithm::ProximalGradient,
            TheoremId::NesterovFirst => Algorithm::NesterovFirst,
            TheoremId::NesterovSecond => Algorithm::NesterovSecond,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub k: usize,
    pub gap: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub theorem_id: TheoremId,
    pub rows: Vec<CertificateRow>,
    pub tol: f64,
    pub residual: f64,
    pub min_margin: f64,
    pub passed: bool,
}

impl CertificateReport {
    fn from_rows(theorem_id: TheoremId, rows: Vec<CertificateRow>, tol: f64, residual: f64) -> Self {
        let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        Self {
            theorem_id,
            passed: !(min_margin < -(tol + residual)) && !min_margin.is_nan(),
            rows,
            tol,
            residual,
            min_margin,
        }
    }

    /// First row whose margin is below `−(tol + residual)`.
    pub fn first_failure(&self) -> Option<&CertificateRow> {
        self.rows.iter().find(|r| r.margin < -(self.tol + self.residual))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tol: f64,
    /// Evaluate the bound even when the theorem's hypotheses fail.
    pub force: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            force: false,
        }
    }
}

fn fixed_step(rec: &RunRecord) -> Result<f64> {
    match rec.echo.schedule {
        Some(StepSchedule::Fixed(alpha)) => Ok(alpha),
        _ => Err(Error::Hypothesis("rate needs a fixed step size".into())),
    }
}

fn echo_value(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Hypothesis(format!("run record lacks {what}")))
}

/// Pairs every iterate in the theorem's validity range with its bound.
///
/// Gaps are `f(x_k) − f*` (`ψ` for composite runs), `‖x_k − x*‖²` for the
/// strongly convex rate and `min_{i≤k} f(x_i) − f*` for the subgradient
/// method. The run passes iff every margin `bound − gap` is at least
/// `−(tol + ref.residual)`. Hypotheses on the step size and constants are
/// checked first unless `opts.force` is set.
pub fn verify_run(
    rec: &RunRecord,
    reference: &OptimumReference,
    theorem: TheoremId,
    opts: VerifyOptions,
) -> Result<CertificateReport> {
    if rec.algorithm != theorem.algorithm() {
        return Err(Error::Hypothesis(format!(
            "{theorem:?} certifies {} runs, record is {}",
            theorem.algorithm(),
            rec.algorithm
        )));
    }
    if reference.x_star.dim() != rec.x0().dim() {
        return Err(Error::DimensionMismatch {
            expected: rec.x0().dim(),
            got: reference.x_star.dim(),
        });
    }
    let r = rec.x0().sub(&reference.x_star).norm2();
    let k_max = rec.iterations();
    let f_gap = |k: usize| rec.f_hist[k] - reference.f_star;
    let hypothesis = |ok: bool, msg: String| {
        if ok || opts.force {
            Ok(())
        } else {
            Err(Error::Hypothesis(msg))
        }
    };

    let mut rows = Vec::new();
    let mut row = |k: usize, gap: f64, bound: f64| {
        rows.push(CertificateRow {
            k,
            gap,
            bound,
            margin: bound - gap,
        })
    };
    match theorem {
        TheoremId::GdConvex => {
            let alpha = fixed_step(rec)?;
            let l = echo_value(rec.echo.lipschitz, "a Lipschitz constant")?;
            hypothesis(
                step_within(alpha, 1.0 / l),
                format!("step {alpha} exceeds 1/L = {} (convex gradient descent rate)", 1.0 / l),
            )?;
            for k in 1..=k_max {
                row(k, f_gap(k), gd_convex_bound(k, alpha, r)?);
            }
        }
        TheoremId::GdStrong => {
            let alpha = fixed_step(rec)?;
            let l = echo_value(rec.echo.lipschitz, "a Lipschitz constant")?;
            let m = echo_value(rec.echo.strong_convexity, "a strong convexity modulus")?;
            if !(m > 0.0) {
                return Err(Error::Hypothesis("objective is not strongly convex (m = 0)".into()));
            }
            hypothesis(
                step_within(alpha, 2.0 / (m + l)),
                format!(
                    "step {alpha} exceeds 2/(m+L) = {} (strongly convex gradient descent rate)",
                    2.0 / (m + l)
                ),
            )?;
            let factor = 1.0 - alpha * (2.0 * m * l / (m + l));
            for k in 0..=k_max {
                let bound = factor.powi(k as i32) * r * r;
                row(k, rec.x_hist[k].dist_sq(&reference.x_star), bound);
            }
        }
        TheoremId::Subgrad => {
            let g = echo_value(rec.echo.subgradient_bound, "a Lipschitz bound G")?;
            hypothesis(g > 0.0, format!("Lipschitz bound G = {g} must be positive (subgradient rate)"))?;
            for k in 0..=k_max.min(rec.steps.len().saturating_sub(1)) {
                row(k, rec.best_hist[k] - reference.f_star, subgrad_bound(&rec.steps[..=k], g, r)?);
            }
        }
        TheoremId::ProxGrad => {
            let t = fixed_step(rec)?;
            let l = echo_value(rec.echo.lipschitz, "a Lipschitz constant")?;
            hypothesis(
                step_within(t, 1.0 / l),
                format!("step {t} exceeds 1/L = {} (proximal gradient rate)", 1.0 / l),
            )?;
            for k in 1..=k_max {
                row(k, f_gap(k), proxgrad_bound(k, t, r)?);
            }
        }
        TheoremId::NesterovFirst | TheoremId::NesterovSecond => {
            let l = echo_value(rec.echo.lipschitz, "a Lipschitz constant")?;
            let t_ok = rec.steps.iter().all(|&t| step_within(t, 1.0 / l) && t >= (1.0 / l) * (1.0 - STEP_SLACK));
            hypothesis(t_ok, format!("accelerated rate needs t = 1/L = {}", 1.0 / l))?;
            for k in 1..=k_max {
                row(k, f_gap(k), nesterov_bound(k, l, r)?);
            }
        }
    }
    Ok(CertificateReport::from_rows(theorem, rows, opts.tol, reference.residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{gamma_first, gradient_descent, NesterovParams};
    use crate::numkernel::Matrix;
    use crate::objectives::{make_least_squares, make_norm_sq, make_scaled_l1};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    #[test]
    fn gd_convex_bound_examples() {
        assert_eq!(gd_convex_bound(10, 0.1, 1.0).unwrap(), 0.5);
        assert_eq!(gd_convex_bound(20, 0.1, 1.0).unwrap(), 0.25);
        for k in 1..50 {
            assert_eq!(gd_convex_bound(2 * k, 0.3, 1.7).unwrap(), gd_convex_bound(k, 0.3, 1.7).unwrap() / 2.0);
        }
        assert_eq!(gd_convex_bound(7, 0.3, 0.0).unwrap(), 0.0);
        assert!(gd_convex_bound(0, 0.1, 1.0).is_err());
    }

    #[test]
    fn gd_strong_bound_examples() {
        assert_eq!(gd_strong_bound(1, 1.0, 1.0, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(gd_strong_bound(2, 0.5, 1.0, 3.0, 1.0).unwrap(), 0.0625);
        assert_eq!(gd_strong_bound(0, 0.5, 1.0, 3.0, 2.0).unwrap(), 4.0);
        assert!(matches!(gd_strong_bound(1, 0.6, 1.0, 3.0, 1.0), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn subgrad_bound_examples() {
        let b = subgrad_bound(&[0.1; 10], 1.0, 1.0).unwrap();
        assert!((b - 0.55).abs() < 1e-15);
        let (r, g) = (2.0, 3.0);
        assert!((subgrad_bound(&[r / g], g, r).unwrap() - r * g).abs() < 1e-15);
        let dim = StepSchedule::Diminishing(1.0);
        let short = subgrad_bound(&dim.steps(100), 1.0, 1.0).unwrap();
        let long = subgrad_bound(&dim.steps(10_000), 1.0, 1.0).unwrap();
        assert!(long < short);
        assert!(subgrad_bound(&[], 1.0, 1.0).is_err());
    }

    #[test]
    fn proxgrad_and_nesterov_bound_examples() {
        assert_eq!(proxgrad_bound(1, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(proxgrad_bound(3, 0.2, 0.0).unwrap(), 0.0);
        assert_eq!(proxgrad_bound(4, 0.2, 1.5).unwrap(), gd_convex_bound(4, 0.2, 1.5).unwrap());
        assert!(proxgrad_bound(0, 1.0, 1.0).is_err());
        assert_eq!(nesterov_bound(1, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(nesterov_bound(3, 1.0, 1.0).unwrap() / nesterov_bound(1, 1.0, 1.0).unwrap(), 0.25);
        for k in 3..200 {
            assert!(nesterov_bound(k, 2.0, 1.3).unwrap() <= proxgrad_bound(k, 0.5, 1.3).unwrap());
        }
        assert!(nesterov_bound(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn hyperparameter_condition() {
        assert!(check_nesterov_hyperparams(&NesterovParams::first(2.0), NesterovVariant::First, 100));
        assert!(check_nesterov_hyperparams(&NesterovParams::second(2.0), NesterovVariant::Second, 100));
        // weights that shrink too fast break the condition at n = 2
        let shrinking = NesterovParams::new(|k| if k <= 1 { 0.9 } else { 0.5 }, |_| 1.0);
        assert!(!check_nesterov_hyperparams(&shrinking, NesterovVariant::First, 10));
        let constant = NesterovParams::new(|_| 0.9, |_| 1.0);
        assert!(check_nesterov_hyperparams(&constant, NesterovVariant::First, 10));
        // growing weights only shrink the left side, so they satisfy it
        let growing = NesterovParams::new(|k| if k <= 1 { 0.5 } else { 0.9 }, |_| 1.0);
        assert!(check_nesterov_hyperparams(&growing, NesterovVariant::First, 10));
        let growing_t = NesterovParams::new(gamma_first, |k| 2f64.powi(k as i32));
        assert!(!check_nesterov_hyperparams(&growing_t, NesterovVariant::First, 10));
    }

    #[test]
    fn closed_form_and_normal_equation_optima() {
        let f = make_norm_sq(1.0, 2).unwrap();
        let r = estimate_optimum(Problem::Smooth(&f), OptimumMethod::ClosedForm).unwrap();
        assert_eq!((r.x_star, r.f_star), (Vector::zeros(2), 0.0));

        let ls = make_least_squares(&Matrix::diag(&[1.0, 2.0]).unwrap(), &v(&[1.0, 2.0])).unwrap();
        let r = estimate_optimum(Problem::Smooth(&ls), OptimumMethod::NormalEquations).unwrap();
        assert_eq!(r.x_star, v(&[1.0, 1.0]));
        assert_eq!(r.f_star, 0.0);

        let deficient = make_least_squares(
            &Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap(),
            &v(&[1.0, 1.0]),
        )
        .unwrap();
        assert!(matches!(
            estimate_optimum(Problem::Smooth(&deficient), OptimumMethod::NormalEquations),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn high_precision_one_dimensional_lasso() {
        let f = make_least_squares(&Matrix::identity(1), &v(&[1.0])).unwrap();
        let p = CompositeProblem::new(f, make_scaled_l1(0.5, 1).unwrap()).unwrap();
        let r = estimate_optimum(Problem::Composite(&p), OptimumMethod::HighPrecisionRun).unwrap();
        assert!((r.x_star[0] - 0.5).abs() < 1e-12);
        assert!((r.f_star - 0.375).abs() < 1e-15);
        assert!(r.residual >= 0.0);
    }

    #[test]
    fn verify_gd_on_half_norm_sq() {
        let f = make_norm_sq(1.0, 2).unwrap();
        let rec = gradient_descent(&f, &v(&[3.0, -4.0]), 1.0, 10).unwrap();
        let reference = estimate_optimum(Problem::Smooth(&f), OptimumMethod::ClosedForm).unwrap();
        let rep = verify_run(&rec, &reference, TheoremId::GdConvex, VerifyOptions::default()).unwrap();
        assert!(rep.passed);
        assert!(rep.rows.iter().all(|r| r.gap == 0.0 && r.margin == r.bound));
    }

    #[test]
    fn verify_gd_least_squares_and_negative_control() {
        let f = make_least_squares(&Matrix::diag(&[1.0, 2.0]).unwrap(), &v(&[1.0, 2.0])).unwrap();
        let reference = estimate_optimum(Problem::Smooth(&f), OptimumMethod::NormalEquations).unwrap();
        let x0 = v(&[-3.0, 5.0]);
        let alpha = 1.0 / f.lipschitz();
        let rec = gradient_descent(&f, &x0, alpha, 100).unwrap();
        let rep = verify_run(&rec, &reference, TheoremId::GdConvex, VerifyOptions::default()).unwrap();
        assert!(rep.passed && rep.min_margin > 0.0);

        let big = gradient_descent(&f, &x0, 3.0 / f.lipschitz(), 20).unwrap();
        assert!(matches!(
            verify_run(&big, &reference, TheoremId::GdConvex, VerifyOptions::default()),
            Err(Error::Hypothesis(_))
        ));
        let forced = verify_run(&big, &reference, TheoremId::GdConvex, VerifyOptions { force: true, ..Default::default() })
            .unwrap();
        assert!(!forced.passed);
        assert!(forced.first_failure().is_some());
    }

    #[test]
    fn verify_rejects_mismatched_theorem() {
        let f = make_norm_sq(1.0, 1).unwrap();
        let rec = gradient_descent(&f, &v(&[1.0]), 0.5, 3).unwrap();
        let reference = OptimumReference::closed_form(v(&[0.0]), 0.0);
        assert!(verify_run(&rec, &reference, TheoremId::ProxGrad, VerifyOptions::default()).is_err());
        assert!(rec.echo.strong_convexity == Some(1.0));
        assert!(verify_run(&rec, &reference, TheoremId::GdStrong, VerifyOptions::default()).unwrap().passed);
    }
}
