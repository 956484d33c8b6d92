//! Gradient descent, the subgradient method, proximal gradient and two
//! Nesterov-accelerated variants, as pure drivers that return the full
//! iterate history.
//!
//! Each update rule lives in a small pure function shared by its driver and
//! by [`replay`], so a stored [`RunRecord`] can be re-derived bit for bit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Vector;
use crate::objectives::{CompositeProblem, NonsmoothFn, SmoothFn};

/// Relative slack allowed when comparing a step against `1/L`, which is
/// itself computed in floating point.
pub const STEP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    GradientDescent,
    Subgradient,
    ProximalGradient,
    NesterovFirst,
    NesterovSecond,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::GradientDescent => "gradient_descent",
            Algorithm::Subgradient => "subgradient",
            Algorithm::ProximalGradient => "proximal_gradient",
            Algorithm::NesterovFirst => "nesterov_first",
            Algorithm::NesterovSecond => "nesterov_second",
        };
        f.write_str(s)
    }
}

/// Step-size rule `α_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    Fixed(f64),
    /// `α_k = a / √(k + 1)`
    Diminishing(f64),
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            StepSchedule::Fixed(v) | StepSchedule::Diminishing(v) => v,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("step parameter must be positive, got {v}")))
        }
    }

    pub fn step(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::Fixed(alpha) => alpha,
            StepSchedule::Diminishing(a) => a / ((k + 1) as f64).sqrt(),
        }
    }

    pub fn steps(&self, count: usize) -> Vec<f64> {
        (0..count).map(|k| self.step(k)).collect()
    }
}

/// Momentum weights `γ_k` and step sizes `t_k` of an accelerated method.
#[derive(Clone)]
pub struct NesterovParams {
    gamma: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    t: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl fmt::Debug for NesterovParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NesterovParams")
            .field("gamma[0..4]", &(0..4).map(|k| self.gamma(k)).collect::<Vec<_>>())
            .field("t[0]", &self.t(0))
            .finish()
    }
}

/// `γ_k = 2 / (2 + k)`
pub fn gamma_first(k: usize) -> f64 {
    2.0 / (2.0 + k as f64)
}

/// `γ_k = 2 / (1 + k)` for `k ≥ 1`. `γ_0 = 1/2` is defined but never used by
/// the recurrences, which start at `k = 1`.
pub fn gamma_second(k: usize) -> f64 {
    if k == 0 {
        0.5
    } else {
        2.0 / (1.0 + k as f64)
    }
}

impl NesterovParams {
    pub fn new(gamma: impl Fn(usize) -> f64 + Send + Sync + 'static, t: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            gamma: Arc::new(gamma),
            t: Arc::new(t),
        }
    }

    /// Defaults of the first variant: `γ_k = 2/(2+k)`, `t_k = 1/L`.
    pub fn first(lipschitz: f64) -> Self {
        let t = 1.0 / lipschitz;
        Self::new(gamma_first, move |_| t)
    }

    /// Defaults of the second variant: `γ_k = 2/(1+k)`, `t_k = 1/L`.
    pub fn second(lipschitz: f64) -> Self {
        let t = 1.0 / lipschitz;
        Self::new(gamma_second, move |_| t)
    }

    pub fn gamma(&self, k: usize) -> f64 {
        (self.gamma)(k)
    }

    pub fn t(&self, k: usize) -> f64 {
        (self.t)(k)
    }

    /// Coefficient on `x_k − x_{k−1}` in the first variant's extrapolation.
    pub fn momentum(&self, k: usize) -> f64 {
        let prev = self.gamma(k - 1);
        self.gamma(k) * (1.0 - prev) / prev
    }
}

/// Run parameters echoed into the record, enough for certificate checks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunEcho {
    pub problem: String,
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_convexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgradient_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Complete history of one run.
///
/// `x_hist` and `f_hist` hold `K + 1` entries (iterates `x_0..x_K` and the
/// objective at each). `steps` and `gammas` hold one entry per transition
/// `x_k → x_{k+1}`: the step (or prox scale `t`) and, for the accelerated
/// methods, the weight `γ` used. `aux_hist` holds the `y` sequence of the
/// accelerated methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub x_hist: Vec<Vector>,
    #[serde(default)]
    pub aux_hist: Vec<Vector>,
    pub f_hist: Vec<f64>,
    pub best_hist: Vec<f64>,
    pub steps: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    pub echo: RunEcho,
}

impl RunRecord {
    pub(crate) fn start(algorithm: Algorithm, x0: Vector, f0: f64, echo: RunEcho) -> Self {
        Self {
            algorithm,
            x_hist: vec![x0],
            aux_hist: Vec::new(),
            f_hist: vec![f0],
            best_hist: vec![f0],
            steps: Vec::new(),
            gammas: Vec::new(),
            echo,
        }
    }

    /// Number of completed iterations.
    pub fn iterations(&self) -> usize {
        self.x_hist.len() - 1
    }

    pub fn x0(&self) -> &Vector {
        &self.x_hist[0]
    }

    pub fn last(&self) -> &Vector {
        self.x_hist.last().expect("record holds x0")
    }

    pub(crate) fn push(&mut self, x: Vector, value: f64) -> Result<()> {
        if !x.is_finite() || !value.is_finite() {
            let iteration = self.x_hist.len();
            return Err(Error::Divergence {
                iteration,
                partial: Box::new(self.clone()),
            });
        }
        let best = self.best_hist.last().copied().unwrap_or(value).min(value);
        self.x_hist.push(x);
        self.f_hist.push(value);
        self.best_hist.push(best);
        Ok(())
    }

    fn push_aux(&mut self, y: Vector) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::Divergence {
                iteration: self.x_hist.len(),
                partial: Box::new(self.clone()),
            });
        }
        self.aux_hist.push(y);
        Ok(())
    }
}

/// The objective an algorithm runs on, for replay.
#[derive(Debug, Clone, Copy)]
pub enum Problem<'a> {
    Smooth(&'a SmoothFn),
    Nonsmooth(&'a NonsmoothFn),
    Composite(&'a CompositeProblem),
}

impl Problem<'_> {
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Problem::Smooth(f) => f.value(x),
            Problem::Nonsmooth(g) => g.value(x),
            Problem::Composite(p) => p.value(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Smooth(f) => f.dim(),
            Problem::Nonsmooth(g) => g.dim(),
            Problem::Composite(p) => p.dim(),
        }
    }
}

pub(crate) fn check_start(dim: usize, x0: &Vector, max_iter: usize) -> Result<()> {
    if x0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x0.dim(),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    Ok(())
}

fn check_prox_step(t: f64, lipschitz: f64) -> Result<()> {
    if !(t > 0.0) || t > (1.0 / lipschitz) * (1.0 + STEP_SLACK) {
        return Err(Error::Hypothesis(format!(
            "proximal step t = {t} must lie in (0, 1/L] with 1/L = {}",
            1.0 / lipschitz
        )));
    }
    Ok(())
}

pub fn gradient_step(f: &SmoothFn, x: &Vector, alpha: f64) -> Vector {
    x.axpy(-alpha, &f.gradient(x))
}

pub fn subgradient_step(g: &NonsmoothFn, x: &Vector, alpha: f64) -> Vector {
    x.axpy(-alpha, &g.subgradient(x))
}

/// `prox_{t·h}(x − t∇f(x))`
pub fn prox_gradient_step(p: &CompositeProblem, x: &Vector, t: f64) -> Result<Vector> {
    p.nonsmooth().prox(&x.axpy(-t, &p.smooth().gradient(x)), t)
}

/// `y_k = x_k + c_k (x_k − x_{k−1})` with `c_k = γ_k(1 − γ_{k−1})/γ_{k−1}`.
pub fn nesterov_extrapolate(params: &NesterovParams, k: usize, x_k: &Vector, x_prev: &Vector) -> Vector {
    let c = params.momentum(k);
    if c == 0.0 {
        x_k.clone()
    } else {
        x_k.axpy(c, &x_k.sub(x_prev))
    }
}

/// One step of the second variant, `k ≥ 1`: returns `(x_k, y_k)`.
pub fn nesterov_second_step(
    p: &CompositeProblem,
    params: &NesterovParams,
    k: usize,
    x_prev: &Vector,
    y_prev: &Vector,
) -> Result<(Vector, Vector)> {
    let gamma = params.gamma(k);
    let z = x_prev.lerp(gamma, y_prev);
    let scale = params.t(k) / gamma;
    let y = p.nonsmooth().prox(&y_prev.axpy(-scale, &p.smooth().gradient(&z)), scale)?;
    let x = x_prev.lerp(gamma, &y);
    Ok((x, y))
}

/// `x_{k+1} = x_k − α∇f(x_k)`
pub fn gradient_descent(f: &SmoothFn, x0: &Vector, alpha: f64, max_iter: usize) -> Result<RunRecord> {
    check_start(f.dim(), x0, max_iter)?;
    let schedule = StepSchedule::Fixed(alpha);
    schedule.validate()?;
    let echo = RunEcho {
        problem: f.name().to_string(),
        max_iter,
        schedule: Some(schedule),
        lipschitz: Some(f.lipschitz()),
        strong_convexity: Some(f.strong_convexity()),
        ..RunEcho::default()
    };
    let mut rec = RunRecord::start(Algorithm::GradientDescent, x0.clone(), f.value(x0), echo);
    for _ in 0..max_iter {
        let x = gradient_step(f, rec.last(), alpha);
        let value = f.value(&x);
        rec.push(x, value)?;
        rec.steps.push(alpha);
    }
    Ok(rec)
}

/// `x_{k+1} = x_k − α_k g_k` with `g_k` from the function's subgradient
/// selection. Not a descent method; `best_hist` tracks the running best.
pub fn subgradient_method(g: &NonsmoothFn, x0: &Vector, schedule: StepSchedule, max_iter: usize) -> Result<RunRecord> {
    check_start(g.dim(), x0, max_iter)?;
    schedule.validate()?;
    let echo = RunEcho {
        problem: g.name().to_string(),
        max_iter,
        schedule: Some(schedule),
        subgradient_bound: g.lipschitz(),
        ..RunEcho::default()
    };
    let mut rec = RunRecord::start(Algorithm::Subgradient, x0.clone(), g.value(x0), echo);
    for k in 0..max_iter {
        let alpha = schedule.step(k);
        let x = subgradient_step(g, rec.last(), alpha);
        let value = g.value(&x);
        rec.push(x, value)?;
        rec.steps.push(alpha);
    }
    Ok(rec)
}

/// `x_{k+1} = prox_{t·h}(x_k − t∇f(x_k))`, requiring `0 < t ≤ 1/L`.
pub fn proximal_gradient(p: &CompositeProblem, x0: &Vector, t: f64, max_iter: usize) -> Result<RunRecord> {
    check_start(p.dim(), x0, max_iter)?;
    check_prox_step(t, p.smooth().lipschitz())?;
    let echo = RunEcho {
        problem: format!("{}+{}", p.smooth().name(), p.nonsmooth().name()),
        max_iter,
        schedule: Some(StepSchedule::Fixed(t)),
        lipschitz: Some(p.smooth().lipschitz()),
        strong_convexity: Some(p.smooth().strong_convexity()),
        ..RunEcho::default()
    };
    let mut rec = RunRecord::start(Algorithm::ProximalGradient, x0.clone(), p.value(x0), echo);
    for _ in 0..max_iter {
        let x = prox_gradient_step(p, rec.last(), t)?;
        let value = p.value(&x);
        rec.push(x, value)?;
        rec.steps.push(t);
    }
    Ok(rec)
}

fn accelerated_echo(p: &CompositeProblem, max_iter: usize) -> RunEcho {
    RunEcho {
        problem: format!("{}+{}", p.smooth().name(), p.nonsmooth().name()),
        max_iter,
        lipschitz: Some(p.smooth().lipschitz()),
        strong_convexity: Some(p.smooth().strong_convexity()),
        ..RunEcho::default()
    }
}

/// First accelerated variant with `t = 1/L` and `γ_k = 2/(2+k)`.
pub fn nesterov_first(p: &CompositeProblem, x0: &Vector, max_iter: usize) -> Result<RunRecord> {
    nesterov_first_with(p, x0, max_iter, &NesterovParams::first(p.smooth().lipschitz()))
}

/// First variant with explicit parameters:
/// `y_0 = x_0`, `y_k = x_k + γ_k(1 − γ_{k−1})/γ_{k−1}·(x_k − x_{k−1})` for
/// `k ≥ 1`, and `x_{k+1} = prox_{t_k·h}(y_k − t_k∇f(y_k))`.
pub fn nesterov_first_with(
    p: &CompositeProblem,
    x0: &Vector,
    max_iter: usize,
    params: &NesterovParams,
) -> Result<RunRecord> {
    check_start(p.dim(), x0, max_iter)?;
    let mut rec = RunRecord::start(Algorithm::NesterovFirst, x0.clone(), p.value(x0), accelerated_echo(p, max_iter));
    for k in 0..max_iter {
        let y = if k == 0 {
            x0.clone()
        } else {
            nesterov_extrapolate(params, k, &rec.x_hist[k], &rec.x_hist[k - 1])
        };
        rec.push_aux(y)?;
        let t = params.t(k);
        let x = prox_gradient_step(p, &rec.aux_hist[k], t)?;
        let value = p.value(&x);
        rec.push(x, value)?;
        rec.steps.push(t);
        rec.gammas.push(params.gamma(k));
    }
    Ok(rec)
}

/// Second accelerated variant with `t = 1/L` and `γ_k = 2/(1+k)`.
pub fn nesterov_second(p: &CompositeProblem, x0: &Vector, max_iter: usize) -> Result<RunRecord> {
    nesterov_second_with(p, x0, max_iter, &NesterovParams::second(p.smooth().lipschitz()))
}

/// Second variant with explicit parameters. For `k ≥ 1`:
/// `z_k = (1−γ_k)x_{k−1} + γ_k y_{k−1}`,
/// `y_k = prox_{(t_k/γ_k)h}(y_{k−1} − (t_k/γ_k)∇f(z_k))`,
/// `x_k = (1−γ_k)x_{k−1} + γ_k y_k`, starting from `y_0 = x_0`.
pub fn nesterov_second_with(
    p: &CompositeProblem,
    x0: &Vector,
    max_iter: usize,
    params: &NesterovParams,
) -> Result<RunRecord> {
    check_start(p.dim(), x0, max_iter)?;
    let mut rec = RunRecord::start(Algorithm::NesterovSecond, x0.clone(), p.value(x0), accelerated_echo(p, max_iter));
    rec.push_aux(x0.clone())?;
    for k in 1..=max_iter {
        let (x, y) = nesterov_second_step(p, params, k, &rec.x_hist[k - 1], &rec.aux_hist[k - 1])?;
        rec.push_aux(y)?;
        let value = p.value(&x);
        rec.push(x, value)?;
        rec.steps.push(params.t(k));
        rec.gammas.push(params.gamma(k));
    }
    Ok(rec)
}

fn same_bits(a: &Vector, b: &Vector) -> bool {
    a.dim() == b.dim() && a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn mismatch(what: &str, k: usize) -> Error {
    Error::InvalidArgument(format!("replay mismatch in {what} at index {k}"))
}

/// Re-derives every stored iterate from its predecessors with the update
/// rule of `rec.algorithm`, and every stored objective value and running
/// best, requiring bitwise equality. Accelerated runs are replayed with the
/// default parameters for `L` taken from the record.
pub fn replay(rec: &RunRecord, problem: Problem<'_>) -> Result<()> {
    let k_max = rec.iterations();
    if rec.f_hist.len() != k_max + 1 || rec.best_hist.len() != k_max + 1 || rec.steps.len() != k_max {
        return Err(Error::InvalidArgument("record histories have inconsistent lengths".into()));
    }
    for (k, x) in rec.x_hist.iter().enumerate() {
        if x.dim() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: x.dim(),
            });
        }
        if problem.value(x).to_bits() != rec.f_hist[k].to_bits() {
            return Err(mismatch("f_hist", k));
        }
        let best = rec.f_hist[..=k].iter().copied().fold(f64::INFINITY, f64::min);
        if best.to_bits() != rec.best_hist[k].to_bits() {
            return Err(mismatch("best_hist", k));
        }
    }

    let wrong_problem = || Error::InvalidArgument(format!("{} cannot be replayed on this problem", rec.algorithm));
    let lipschitz = || {
        rec.echo
            .lipschitz
            .ok_or_else(|| Error::InvalidArgument("record lacks a Lipschitz constant".into()))
    };
    for k in 0..k_max {
        let (x, x_next) = (&rec.x_hist[k], &rec.x_hist[k + 1]);
        let expected = match (rec.algorithm, problem) {
            (Algorithm::GradientDescent, Problem::Smooth(f)) => gradient_step(f, x, rec.steps[k]),
            (Algorithm::Subgradient, Problem::Nonsmooth(g)) => subgradient_step(g, x, rec.steps[k]),
            (Algorithm::ProximalGradient, Problem::Composite(p)) => prox_gradient_step(p, x, rec.steps[k])?,
            (Algorithm::NesterovFirst, Problem::Composite(p)) => {
                let params = NesterovParams::first(lipschitz()?);
                let y = if k == 0 {
                    x.clone()
                } else {
                    nesterov_extrapolate(&params, k, x, &rec.x_hist[k - 1])
                };
                if !rec.aux_hist.get(k).is_some_and(|stored| same_bits(stored, &y)) {
                    return Err(mismatch("aux_hist", k));
                }
                prox_gradient_step(p, &y, params.t(k))?
            }
            (Algorithm::NesterovSecond, Problem::Composite(p)) => {
                let params = NesterovParams::second(lipschitz()?);
                let y_prev = rec.aux_hist.get(k).ok_or_else(|| mismatch("aux_hist", k))?;
                let (x_new, y) = nesterov_second_step(p, &params, k + 1, x, y_prev)?;
                if !rec.aux_hist.get(k + 1).is_some_and(|stored| same_bits(stored, &y)) {
                    return Err(mismatch("aux_hist", k + 1));
                }
                x_new
            }
            _ => return Err(wrong_problem()),
        };
        if !same_bits(&expected, x_next) {
            return Err(mismatch("x_hist", k + 1));
        }
    }
    Ok(())
}
