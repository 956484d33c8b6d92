//! `min ½‖Ax − b‖² + λ‖x‖₁`: instance generation, the soft-thresholding
//! solver and end-to-end certification.

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    check_start, nesterov_first, nesterov_second, proximal_gradient, Algorithm, Problem, RunEcho, RunRecord,
    StepSchedule,
};
use crate::certificates::{
    estimate_optimum, verify_run, CertificateReport, OptimumMethod, OptimumReference, TheoremId, VerifyOptions,
};
use crate::error::{Error, Result};
use crate::numkernel::{Matrix, Rng, Vector};
use crate::objectives::{make_least_squares, make_scaled_l1, sign, CompositeProblem};

/// Standard deviation of the observation noise added by [`generate_lasso`].
pub const NOISE_LEVEL: f64 = 0.01;
/// Default `λ` as a fraction of `‖Aᵀb‖∞`.
pub const DEFAULT_LAMBDA_FRACTION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct LassoProblem {
    a: Matrix,
    b: Vector,
    lambda: f64,
    seed: Option<u64>,
    composite: CompositeProblem,
}

/// On-disk form: the matrix as rows, `L` recomputed on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoFile {
    pub a: Matrix,
    pub b: Vector,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl LassoProblem {
    pub fn new(a: Matrix, b: Vector, lambda: f64) -> Result<Self> {
        let smooth = make_least_squares(&a, &b)?;
        let nonsmooth = make_scaled_l1(lambda, a.cols())?;
        let composite = CompositeProblem::new(smooth, nonsmooth)?;
        Ok(Self {
            a,
            b,
            lambda,
            seed: None,
            composite,
        })
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `σ_max(A)²`
    pub fn lipschitz(&self) -> f64 {
        self.composite.smooth().lipschitz()
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn composite(&self) -> &CompositeProblem {
        &self.composite
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.composite.value(x)
    }

    pub fn to_file(&self) -> LassoFile {
        LassoFile {
            a: self.a.clone(),
            b: self.b.clone(),
            lambda: self.lambda,
            seed: self.seed,
        }
    }

    pub fn from_file(file: LassoFile) -> Result<Self> {
        let p = Self::new(file.a, file.b, file.lambda)?;
        Ok(match file.seed {
            Some(seed) => p.with_seed(seed),
            None => p,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }
}

/// Gaussian `m×n` design, a ground truth with `s` entries of `±1` on a random
/// support, and `b = A x♮ + 0.01·noise`. `λ` defaults to `0.1‖Aᵀb‖∞`.
pub fn generate_lasso(m: usize, n: usize, s: usize, lambda: Option<f64>, seed: u64) -> Result<LassoProblem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("need m, n >= 1, got {m}x{n}")));
    }
    if s == 0 || s > n {
        return Err(Error::InvalidArgument(format!("sparsity must lie in 1..={n}, got {s}")));
    }
    let mut rng = Rng::new(seed);
    let a = rng.gaussian_matrix(m, n);
    let mut support: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = i + rng.index(n - i);
        support.swap(i, j);
    }
    let mut truth = vec![0.0; n];
    for &i in &support[..s] {
        truth[i] = if rng.coin() { 1.0 } else { -1.0 };
    }
    let truth = Vector::new(truth)?;
    let noise = rng.normal_vector(m).scale(NOISE_LEVEL);
    let b = a.matvec(&truth)?.add(&noise);
    let lambda = match lambda {
        Some(l) => l,
        None => DEFAULT_LAMBDA_FRACTION * a.matvec_t(&b)?.norm_inf(),
    };
    Ok(LassoProblem::new(a, b, lambda)?.with_seed(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LassoMethod {
    ProxGrad,
    NesterovFirst,
    NesterovSecond,
}

impl LassoMethod {
    pub fn theorem(self) -> TheoremId {
        match self {
            LassoMethod::ProxGrad => TheoremId::ProxGrad,
            LassoMethod::NesterovFirst => TheoremId::NesterovFirst,
            LassoMethod::NesterovSecond => TheoremId::NesterovSecond,
        }
    }
}

/// `L/(2k)·R²`, the proximal gradient rate written in terms of `L`.
pub fn lasso_bound(k: usize, lipschitz: f64, r: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("bound is undefined at k = 0".into()));
    }
    Ok(lipschitz / (2.0 * k as f64) * (r * r))
}

/// One soft-thresholding step: `y = x − t·Aᵀ(Ax − b)`, then
/// `x⁺_i = sign(y_i)·max(|y_i| − tλ, 0)`.
pub fn ista_step(p: &LassoProblem, x: &Vector, t: f64) -> Vector {
    let residual = p.a.matvec(x).expect("dimension checked").sub(&p.b);
    let y = x.axpy(-t, &p.a.matvec_t(&residual).expect("dimension checked"));
    let threshold = t * p.lambda;
    y.map(|yi| sign(yi) * f64::max(yi.abs() - threshold, 0.0))
}

/// Runs `method` with `t = 1/L`. Proximal gradient uses [`ista_step`]; its
/// record is indistinguishable from the generic driver's.
pub fn solve_lasso(p: &LassoProblem, method: LassoMethod, x0: &Vector, max_iter: usize) -> Result<RunRecord> {
    let mut rec = match method {
        LassoMethod::ProxGrad => ista(p, x0, max_iter)?,
        LassoMethod::NesterovFirst => nesterov_first(&p.composite, x0, max_iter)?,
        LassoMethod::NesterovSecond => nesterov_second(&p.composite, x0, max_iter)?,
    };
    rec.echo.seed = p.seed;
    Ok(rec)
}

fn ista(p: &LassoProblem, x0: &Vector, max_iter: usize) -> Result<RunRecord> {
    check_start(p.dim(), x0, max_iter)?;
    let t = 1.0 / p.lipschitz();
    let c = &p.composite;
    let echo = RunEcho {
        problem: format!("{}+{}", c.smooth().name(), c.nonsmooth().name()),
        max_iter,
        schedule: Some(StepSchedule::Fixed(t)),
        lipschitz: Some(c.smooth().lipschitz()),
        strong_convexity: Some(c.smooth().strong_convexity()),
        ..RunEcho::default()
    };
    let mut rec = RunRecord::start(Algorithm::ProximalGradient, x0.clone(), p.value(x0), echo);
    for _ in 0..max_iter {
        let x = ista_step(p, rec.last(), t);
        let value = p.value(&x);
        rec.push(x, value)?;
        rec.steps.push(t);
    }
    Ok(rec)
}

/// Reference optimum from a long accelerated run.
pub fn lasso_reference(p: &LassoProblem) -> Result<OptimumReference> {
    estimate_optimum(Problem::Composite(&p.composite), OptimumMethod::HighPrecisionRun)
}

/// Solves, builds a high-precision reference and verifies every iterate
/// against the method's rate.
pub fn certify_lasso(
    p: &LassoProblem,
    method: LassoMethod,
    x0: &Vector,
    max_iter: usize,
    tol: f64,
) -> Result<CertificateReport> {
    let rec = solve_lasso(p, method, x0, max_iter)?;
    let reference = lasso_reference(p)?;
    verify_run(&rec, &reference, method.theorem(), VerifyOptions { tol, force: false })
}

/// Proximal gradient through the generic driver, for cross-checking
/// [`solve_lasso`].
pub fn solve_lasso_generic(p: &LassoProblem, x0: &Vector, max_iter: usize) -> Result<RunRecord> {
    let mut rec = proximal_gradient(&p.composite, x0, 1.0 / p.lipschitz(), max_iter)?;
    rec.echo.seed = p.seed;
    Ok(rec)
}
