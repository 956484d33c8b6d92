//! Objective-function instances: smooth parts with value and gradient oracles,
//! nonsmooth parts with subgradient, membership and prox oracles, and the
//! composite `f + h` used by the proximal methods.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkernel::{gram_min_eigenvalue, spectral_norm, Matrix, Vector};

type ScalarFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type MembershipFn = Arc<dyn Fn(&Vector, &Vector, f64) -> bool + Send + Sync>;
type PredicateFn = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;
type ProxFn = Arc<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;

/// Power-iteration settings used when deriving Lipschitz constants.
pub const SPECTRAL_TOL: f64 = 1e-14;
pub const SPECTRAL_MAX_ITER: usize = 200_000;

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_dim(expected: usize, x: &Vector) {
    assert_eq!(x.dim(), expected, "point has wrong dimension");
}

/// A known minimizer and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownMinimum {
    pub x_star: Vector,
    pub f_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothKind {
    LeastSquares { a: Matrix, b: Vector },
    NormSq { c: f64 },
    Custom,
}

/// Differentiable objective with an `L`-Lipschitz gradient and strong
/// convexity modulus `m` (zero when not strongly convex).
#[derive(Clone)]
pub struct SmoothFn {
    name: String,
    dim: usize,
    eval: ScalarFn,
    grad: VectorFn,
    lipschitz: f64,
    strong_convexity: f64,
    minimum: Option<KnownMinimum>,
    kind: SmoothKind,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("strong_convexity", &self.strong_convexity)
            .finish_non_exhaustive()
    }
}

impl SmoothFn {
    /// Builds an instance from arbitrary oracles. The metadata is trusted, not
    /// verified; the `convex_analysis` checkers exist to test such claims.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        lipschitz: f64,
        strong_convexity: f64,
        eval: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        if !(strong_convexity >= 0.0) || strong_convexity > lipschitz {
            return Err(Error::InvalidArgument(format!(
                "strong convexity modulus {strong_convexity} must lie in [0, L = {lipschitz}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            lipschitz,
            strong_convexity,
            minimum: None,
            kind: SmoothKind::Custom,
        })
    }

    pub fn with_minimum(mut self, x_star: Vector, f_star: f64) -> Self {
        self.minimum = Some(KnownMinimum { x_star, f_star });
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    pub fn known_minimum(&self) -> Option<&KnownMinimum> {
        self.minimum.as_ref()
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub fn value(&self, x: &Vector) -> f64 {
        check_dim(self.dim, x);
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        check_dim(self.dim, x);
        (self.grad)(x)
    }
}

/// `f(x) = ½‖Ax − b‖²` with `L = σ_max(A)²` and `m = λ_min(AᵀA)`.
pub fn make_least_squares(a: &Matrix, b: &Vector) -> Result<SmoothFn> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.dim(),
        });
    }
    if a.is_zero() {
        return Err(Error::InvalidArgument("least-squares matrix must be nonzero".into()));
    }
    let sigma = spectral_norm(a, SPECTRAL_TOL, SPECTRAL_MAX_ITER)?;
    let lipschitz = sigma * sigma;
    let strong = gram_min_eigenvalue(a)?.min(lipschitz);

    let (a_eval, b_eval) = (Arc::new(a.clone()), Arc::new(b.clone()));
    let (a_grad, b_grad) = (Arc::clone(&a_eval), Arc::clone(&b_eval));
    let eval = move |x: &Vector| {
        let r = a_eval.matvec(x).expect("dimension checked").sub(&b_eval);
        0.5 * r.norm2_sq()
    };
    let grad = move |x: &Vector| {
        let r = a_grad.matvec(x).expect("dimension checked").sub(&b_grad);
        a_grad.matvec_t(&r).expect("dimension checked")
    };
    let mut f = SmoothFn::custom("least_squares", a.cols(), lipschitz, strong, eval, grad)?;
    f.kind = SmoothKind::LeastSquares {
        a: a.clone(),
        b: b.clone(),
    };
    Ok(f)
}

/// `f(x) = (c/2)‖x‖²`, minimized at the origin.
pub fn make_norm_sq(c: f64, dim: usize) -> Result<SmoothFn> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let mut f = SmoothFn::custom(
        "norm_sq",
        dim,
        c,
        c,
        move |x| 0.5 * c * x.norm2_sq(),
        move |x| x.scale(c),
    )?
    .with_minimum(Vector::zeros(dim), 0.0);
    f.kind = SmoothKind::NormSq { c };
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonsmoothKind {
    ScaledL1 { lambda: f64 },
    Zero,
    Quadratic { c: f64 },
    Custom,
}

/// Convex, possibly nondifferentiable function with subgradient selection,
/// subdifferential membership and (optionally) a closed-form prox.
#[derive(Clone)]
pub struct NonsmoothFn {
    name: String,
    dim: usize,
    eval: ScalarFn,
    subgrad: VectorFn,
    contains: MembershipFn,
    smooth_at: PredicateFn,
    prox: Option<ProxFn>,
    lipschitz: Option<f64>,
    minimum: Option<KnownMinimum>,
    kind: NonsmoothKind,
}

impl fmt::Debug for NonsmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonsmoothFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("has_prox", &self.prox.is_some())
            .finish_non_exhaustive()
    }
}

impl NonsmoothFn {
    /// Instance without a prox oracle, from value, subgradient selection,
    /// membership test and smoothness predicate.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        subgrad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        contains: impl Fn(&Vector, &Vector, f64) -> bool + Send + Sync + 'static,
        smooth_at: impl Fn(&Vector) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            subgrad: Arc::new(subgrad),
            contains: Arc::new(contains),
            smooth_at: Arc::new(smooth_at),
            prox: None,
            lipschitz: None,
            minimum: None,
            kind: NonsmoothKind::Custom,
        })
    }

    /// Attaches `prox(x, t) = argmin_u t·g(u) + ½‖u − x‖²`.
    pub fn with_prox(mut self, prox: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static) -> Self {
        self.prox = Some(Arc::new(prox));
        self
    }

    pub fn with_lipschitz(mut self, g: f64) -> Self {
        self.lipschitz = Some(g);
        self
    }

    pub fn with_minimum(mut self, x_star: Vector, f_star: f64) -> Self {
        self.minimum = Some(KnownMinimum { x_star, f_star });
        self
    }

    /// Replaces the subgradient selection rule. The rule must pick elements of
    /// the subdifferential; any such policy keeps the subgradient-method bound
    /// valid.
    pub fn with_subgradient_policy(
        mut self,
        policy: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        self.subgrad = Arc::new(policy);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn known_minimum(&self) -> Option<&KnownMinimum> {
        self.minimum.as_ref()
    }

    pub fn kind(&self) -> &NonsmoothKind {
        &self.kind
    }

    pub fn has_prox(&self) -> bool {
        self.prox.is_some()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        check_dim(self.dim, x);
        (self.eval)(x)
    }

    pub fn subgradient(&self, x: &Vector) -> Vector {
        check_dim(self.dim, x);
        (self.subgrad)(x)
    }

    /// Whether `g ∈ ∂f(x)`, up to `tol`.
    pub fn subdiff_contains(&self, x: &Vector, g: &Vector, tol: f64) -> bool {
        check_dim(self.dim, x);
        check_dim(self.dim, g);
        (self.contains)(x, g, tol)
    }

    /// Whether the function is differentiable at `x`.
    pub fn is_smooth_at(&self, x: &Vector) -> bool {
        check_dim(self.dim, x);
        (self.smooth_at)(x)
    }

    pub fn prox(&self, x: &Vector, t: f64) -> Result<Vector> {
        check_dim(self.dim, x);
        let prox = self.prox.as_ref().ok_or_else(|| Error::NoProx(self.name.clone()))?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("prox scale must be positive, got {t}")));
        }
        Ok(prox(x, t))
    }
}

/// Coordinatewise soft-thresholding `sign(v)·max(|v| − threshold, 0)`.
pub fn soft_threshold(v: &Vector, threshold: f64) -> Vector {
    v.map(|x| sign(x) * f64::max(x.abs() - threshold, 0.0))
}

/// `g(x) = λ‖x‖₁` with soft-thresholding prox and `G = λ√dim`.
pub fn make_scaled_l1(lambda: f64, dim: usize) -> Result<NonsmoothFn> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let mut g = NonsmoothFn::custom(
        "scaled_l1",
        dim,
        move |x| lambda * x.norm1(),
        move |x| x.map(|v| lambda * sign(v)),
        move |x, g, tol| {
            x.iter().zip(g.iter()).all(|(&xi, &gi)| {
                if xi != 0.0 {
                    (gi - lambda * sign(xi)).abs() <= tol
                } else {
                    gi.abs() <= lambda + tol
                }
            })
        },
        |x| x.iter().all(|&v| v != 0.0),
    )?
    .with_prox(move |x, t| soft_threshold(x, t * lambda))
    .with_lipschitz(lambda * (dim as f64).sqrt())
    .with_minimum(Vector::zeros(dim), 0.0);
    g.kind = NonsmoothKind::ScaledL1 { lambda };
    Ok(g)
}

/// `f(x) = |x₁|` on R¹, with `∂f(0) = [−1, 1]`.
pub fn make_abs_1d() -> NonsmoothFn {
    let mut g = make_scaled_l1(1.0, 1).expect("valid parameters");
    g.name = "abs".into();
    g
}

/// `g ≡ 0`; its prox is the identity.
pub fn make_zero(dim: usize) -> Result<NonsmoothFn> {
    let mut g = NonsmoothFn::custom(
        "zero",
        dim,
        |_| 0.0,
        |x| Vector::zeros(x.dim()),
        |_, g, tol| g.norm_inf() <= tol,
        |_| true,
    )?
    .with_prox(|x, _| x.clone());
    g.kind = NonsmoothKind::Zero;
    Ok(g)
}

/// `g(x) = (c/2)‖x‖²` in prox-term form: `prox(x, t) = x / (1 + t·c)`.
pub fn make_quadratic_penalty(c: f64, dim: usize) -> Result<NonsmoothFn> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let mut g = NonsmoothFn::custom(
        "quadratic_penalty",
        dim,
        move |x| 0.5 * c * x.norm2_sq(),
        move |x| x.scale(c),
        move |x, g, tol| x.iter().zip(g.iter()).all(|(&xi, &gi)| (gi - c * xi).abs() <= tol),
        |_| true,
    )?
    .with_prox(move |x, t| x.scale(1.0 / (1.0 + t * c)))
    .with_minimum(Vector::zeros(dim), 0.0);
    g.kind = NonsmoothKind::Quadratic { c };
    Ok(g)
}

/// `ψ = f + h` with `f` smooth and `h` prox-friendly.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    smooth: SmoothFn,
    nonsmooth: NonsmoothFn,
}

impl CompositeProblem {
    pub fn new(smooth: SmoothFn, nonsmooth: NonsmoothFn) -> Result<Self> {
        if smooth.dim() != nonsmooth.dim() {
            return Err(Error::DimensionMismatch {
                expected: smooth.dim(),
                got: nonsmooth.dim(),
            });
        }
        Ok(Self { smooth, nonsmooth })
    }

    pub fn smooth(&self) -> &SmoothFn {
        &self.smooth
    }

    pub fn nonsmooth(&self) -> &NonsmoothFn {
        &self.nonsmooth
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.smooth.value(x) + self.nonsmooth.value(x)
    }
}
