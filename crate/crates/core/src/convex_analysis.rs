//! Sampled checks of first-order convexity and smoothness characterizations.
//!
//! Each checker evaluates one inequality on seeded samples and returns a
//! [`PropertyReport`] listing every sample where the inequality fails by more
//! than `tol`. A pass only certifies the sampled region, which the report
//! records. Checkers never infer one characterization from another.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{Rng, Vector};
use crate::objectives::{NonsmoothFn, SmoothFn};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_RADIUS: f64 = 10.0;

/// Radii at which sum-rule membership is probed.
pub const MEMBERSHIP_RADII: [f64; 3] = [1e-3, 1.0, 10.0];
pub const MEMBERSHIP_DIRECTIONS: usize = 200;

const GRADIENT_LIMIT_DIRECTIONS: usize = 8;
const SINGLETON_PERTURBATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub x: Vector,
    pub y: Vector,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property_name: String,
    pub samples_tested: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
    pub tol: f64,
    pub region: String,
}

impl PropertyReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

struct ReportBuilder {
    name: String,
    tol: f64,
    region: String,
    samples: usize,
    violations: Vec<Violation>,
}

impl ReportBuilder {
    fn new(name: &str, tol: f64, region: String) -> Self {
        Self {
            name: name.to_string(),
            tol,
            region,
            samples: 0,
            violations: Vec::new(),
        }
    }

    /// Records a test of `lhs ≥ rhs − tol`.
    fn ge(&mut self, check: &str, x: &Vector, y: &Vector, lhs: f64, rhs: f64) {
        self.push(check, x, y, lhs, rhs, rhs - lhs);
    }

    /// Records a test of `lhs ≤ rhs + tol`.
    fn le(&mut self, check: &str, x: &Vector, y: &Vector, lhs: f64, rhs: f64) {
        self.push(check, x, y, lhs, rhs, lhs - rhs);
    }

    fn push(&mut self, check: &str, x: &Vector, y: &Vector, lhs: f64, rhs: f64, deficit: f64) {
        self.samples += 1;
        // NaN deficits count as violations
        if !(deficit <= self.tol) {
            self.violations.push(Violation {
                check: check.to_string(),
                x: x.clone(),
                y: y.clone(),
                lhs,
                rhs,
                deficit,
            });
        }
    }

    fn finish(self) -> PropertyReport {
        PropertyReport {
            property_name: self.name,
            samples_tested: self.samples,
            passed: self.violations.is_empty(),
            violations: self.violations,
            tol: self.tol,
            region: self.region,
        }
    }
}

/// Where the pair-based checkers draw their sample points.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Uniform pairs in the ball of `radius` around the origin.
    Ball { radius: f64, seed: u64 },
    /// An explicit list of pairs, tested as given.
    Pairs(Vec<(Vector, Vector)>),
}

impl Sampler {
    pub fn ball(seed: u64) -> Self {
        Sampler::Ball {
            radius: DEFAULT_RADIUS,
            seed,
        }
    }

    fn seed(&self) -> u64 {
        match self {
            Sampler::Ball { seed, .. } => *seed,
            Sampler::Pairs(_) => 0,
        }
    }

    fn region(&self) -> String {
        match self {
            Sampler::Ball { radius, seed } => format!("ball(radius={radius}, seed={seed})"),
            Sampler::Pairs(p) => format!("explicit({} pairs)", p.len()),
        }
    }

    /// `n` pairs with an interpolation weight in `[0, 1]` each.
    fn triples(&self, dim: usize, n: usize) -> Vec<(Vector, Vector, f64)> {
        let mut rng = Rng::new(self.seed());
        match self {
            Sampler::Ball { radius, .. } => (0..n)
                .map(|_| {
                    let x = rng.in_ball(dim, *radius);
                    let y = rng.in_ball(dim, *radius);
                    let a = rng.uniform(0.0, 1.0);
                    (x, y, a)
                })
                .collect(),
            Sampler::Pairs(pairs) => pairs
                .iter()
                .map(|(x, y)| {
                    assert_eq!(x.dim(), dim, "sample has wrong dimension");
                    (x.clone(), y.clone(), rng.uniform(0.0, 1.0))
                })
                .collect(),
        }
    }
}

fn require_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")))
    }
}

fn inner(a: &Vector, b: &Vector) -> f64 {
    a.dot(b).expect("sampler yields matching dimensions")
}

/// `|f(x+h) − f(x) − ⟨∇f(x), h⟩| / ‖h‖`
pub fn remainder_quotient(f: &SmoothFn, x: &Vector, h: &Vector) -> f64 {
    let fx = f.value(x);
    let lin = inner(&f.gradient(x), h);
    (f.value(&x.add(h)) - fx - lin).abs() / h.norm2()
}

/// Little-o test of the gradient oracle at `x`. `radii` must decrease
/// strictly to below 1e-6; along seeded directions (the first basis vector
/// plus random unit vectors) the first-order remainder quotient at the
/// smallest radius must fall below `tol`.
pub fn check_gradient_limit(f: &SmoothFn, x: &Vector, radii: &[f64], tol: f64, seed: u64) -> Result<PropertyReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
    }
    let smallest = *radii.last().expect("non-empty");
    if smallest >= 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "smallest radius must be below 1e-6, got {smallest}"
        )));
    }
    let dim = f.dim();
    let mut rng = Rng::new(seed);
    let mut directions = vec![Vector::basis(dim, 0)];
    directions.extend((0..GRADIENT_LIMIT_DIRECTIONS).map(|_| rng.unit_vector(dim)));

    let mut report = ReportBuilder::new(
        "gradient_limit",
        tol,
        format!("sphere(center=x, radii={radii:?}, seed={seed})"),
    );
    for d in &directions {
        let h = d.scale(smallest);
        let q = remainder_quotient(f, x, &h);
        report.le("remainder_quotient", x, &x.add(&h), q, 0.0);
    }
    Ok(report.finish())
}

/// `f(y) ≥ f(x) + ⟨∇f(x), y − x⟩`
pub fn check_first_order_condition(f: &SmoothFn, sampler: &Sampler, n: usize, tol: f64) -> Result<PropertyReport> {
    let mut report = ReportBuilder::new("first_order_condition", tol, sampler.region());
    for (x, y, _) in sampler.triples(f.dim(), n) {
        let rhs = f.value(&x) + inner(&f.gradient(&x), &y.sub(&x));
        report.ge("first_order", &x, &y, f.value(&y), rhs);
    }
    Ok(report.finish())
}

/// `⟨∇f(x) − ∇f(y), x − y⟩ ≥ 0`
pub fn check_gradient_monotone(f: &SmoothFn, sampler: &Sampler, n: usize, tol: f64) -> Result<PropertyReport> {
    let mut report = ReportBuilder::new("gradient_monotone", tol, sampler.region());
    for (x, y, _) in sampler.triples(f.dim(), n) {
        let lhs = inner(&f.gradient(&x).sub(&f.gradient(&y)), &x.sub(&y));
        report.ge("monotone", &x, &y, lhs, 0.0);
    }
    Ok(report.finish())
}

/// Secant inequality `g(ax + (1−a)y) ≤ a·g(x) + (1−a)·g(y)` for one triple.
fn secant(report: &mut ReportBuilder, check: &str, g: impl Fn(&Vector) -> f64, x: &Vector, y: &Vector, a: f64) {
    let z = y.lerp(a, x);
    report.le(check, x, y, g(&z), a * g(x) + (1.0 - a) * g(y));
}

/// Strong convexity with modulus `m`, as three independent sampled
/// inequalities: convexity of `f − (m/2)‖·‖²`, the quadratic lower bound and
/// strong monotonicity of the gradient.
pub fn check_strong_convexity(f: &SmoothFn, m: f64, sampler: &Sampler, n: usize, tol: f64) -> Result<PropertyReport> {
    require_positive("strong convexity modulus", m)?;
    let mut report = ReportBuilder::new("strong_convexity", tol, sampler.region());
    for (x, y, a) in sampler.triples(f.dim(), n) {
        secant(&mut report, "shifted_convexity", |p| f.value(p) - 0.5 * m * p.norm2_sq(), &x, &y, a);

        let gx = f.gradient(&x);
        let d2 = x.dist_sq(&y);
        let lower = f.value(&x) + inner(&gx, &y.sub(&x)) + 0.5 * m * d2;
        report.ge("quadratic_lower_bound", &x, &y, f.value(&y), lower);

        let lhs = inner(&gx.sub(&f.gradient(&y)), &x.sub(&y));
        report.ge("strong_monotone", &x, &y, lhs, m * d2);
    }
    Ok(report.finish())
}

/// `f(y) ≤ f(x) + ⟨∇f(x), y − x⟩ + (L/2)‖y − x‖²`
pub fn check_smooth_upper_bound(f: &SmoothFn, l: f64, sampler: &Sampler, n: usize, tol: f64) -> Result<PropertyReport> {
    require_positive("Lipschitz constant", l)?;
    let mut report = ReportBuilder::new("smooth_upper_bound", tol, sampler.region());
    for (x, y, _) in sampler.triples(f.dim(), n) {
        let upper = f.value(&x) + inner(&f.gradient(&x), &y.sub(&x)) + 0.5 * l * x.dist_sq(&y);
        report.le("upper_bound", &x, &y, f.value(&y), upper);
    }
    Ok(report.finish())
}

/// Cocoercivity `⟨∇f(x) − ∇f(y), x − y⟩ ≥ (1/L)‖∇f(x) − ∇f(y)‖²` together
/// with convexity of `(L/2)‖·‖² − f`. Convexity of `f` itself is the
/// caller's claim and is not checked here.
pub fn check_cocoercivity(f: &SmoothFn, l: f64, sampler: &Sampler, n: usize, tol: f64) -> Result<PropertyReport> {
    require_positive("Lipschitz constant", l)?;
    let mut report = ReportBuilder::new("cocoercivity", tol, sampler.region());
    for (x, y, a) in sampler.triples(f.dim(), n) {
        let dg = f.gradient(&x).sub(&f.gradient(&y));
        let lhs = inner(&dg, &x.sub(&y));
        report.ge("cocoercive", &x, &y, lhs, dg.norm2_sq() / l);
        secant(&mut report, "smooth_gap_convexity", |p| 0.5 * l * p.norm2_sq() - f.value(p), &x, &y, a);
    }
    Ok(report.finish())
}

/// `⟨∇f(x) − ∇f(y), x − y⟩ ≥ mL/(m+L)‖x − y‖² + 1/(m+L)‖∇f(x) − ∇f(y)‖²`
pub fn check_strong_and_smooth(
    f: &SmoothFn,
    m: f64,
    l: f64,
    sampler: &Sampler,
    n: usize,
    tol: f64,
) -> Result<PropertyReport> {
    require_positive("strong convexity modulus", m)?;
    require_positive("Lipschitz constant", l)?;
    if m > l {
        return Err(Error::InvalidArgument(format!("m = {m} exceeds L = {l}")));
    }
    let mut report = ReportBuilder::new("strong_and_smooth", tol, sampler.region());
    for (x, y, _) in sampler.triples(f.dim(), n) {
        let dg = f.gradient(&x).sub(&f.gradient(&y));
        let lhs = inner(&dg, &x.sub(&y));
        let rhs = m * l / (m + l) * x.dist_sq(&y) + dg.norm2_sq() / (m + l);
        report.ge("strong_smooth", &x, &y, lhs, rhs);
    }
    Ok(report.finish())
}

/// Sampled subgradient inequality for `g` at `x`: `value(y) ≥ value(x) +
/// ⟨g, y − x⟩ − tol` along [`MEMBERSHIP_DIRECTIONS`] seeded directions (the
/// signed basis vectors first) at every radius in [`MEMBERSHIP_RADII`].
/// Returns the first failing `y`, if any.
pub fn subgradient_inequality_witness(
    value: impl Fn(&Vector) -> f64,
    x: &Vector,
    g: &Vector,
    tol: f64,
    seed: u64,
) -> Option<(Vector, f64, f64)> {
    let dim = x.dim();
    let mut rng = Rng::new(seed);
    let mut directions = Vec::with_capacity(MEMBERSHIP_DIRECTIONS);
    for i in 0..dim {
        if directions.len() + 2 > MEMBERSHIP_DIRECTIONS {
            break;
        }
        directions.push(Vector::basis(dim, i));
        directions.push(Vector::basis(dim, i).scale(-1.0));
    }
    while directions.len() < MEMBERSHIP_DIRECTIONS {
        directions.push(rng.unit_vector(dim));
    }
    let fx = value(x);
    for &r in &MEMBERSHIP_RADII {
        for d in &directions {
            let y = x.axpy(r, d);
            let lhs = value(&y);
            let rhs = fx + inner(g, &y.sub(x));
            if !(lhs >= rhs - tol) {
                return Some((y, lhs, rhs));
            }
        }
    }
    None
}

/// Sum rule `∂(f1 + f2)(x) = ∇f1(x) + ∂f2(x)` for differentiable `f1`: for
/// every `(x, g)` case, membership of `g` in the left side (sampled
/// subgradient inequality of `f1 + f2`) must agree with membership of
/// `g − ∇f1(x)` in `∂f2(x)` (the oracle of `f2`).
pub fn check_moreau_rockafellar(
    f1: &SmoothFn,
    f2: &NonsmoothFn,
    cases: &[(Vector, Vector)],
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            got: f2.dim(),
        });
    }
    let mut report = ReportBuilder::new(
        "moreau_rockafellar",
        tol,
        format!("sum-rule cases={}, radii={MEMBERSHIP_RADII:?}, seed={seed}", cases.len()),
    );
    for (x, g) in cases {
        let (lhs, rhs) = sum_rule_sides(f1, f2, x, g, tol, seed);
        let deficit = if lhs == rhs { 0.0 } else { f64::INFINITY };
        report.push("sides_agree", x, g, f64::from(u8::from(lhs)), f64::from(u8::from(rhs)), deficit);
    }
    Ok(report.finish())
}

/// `(g ∈ ∂(f1+f2)(x) sampled, g − ∇f1(x) ∈ ∂f2(x))`
pub fn sum_rule_sides(f1: &SmoothFn, f2: &NonsmoothFn, x: &Vector, g: &Vector, tol: f64, seed: u64) -> (bool, bool) {
    let lhs = subgradient_inequality_witness(|p| f1.value(p) + f2.value(p), x, g, tol, seed).is_none();
    let rhs = f2.subdiff_contains(x, &g.sub(&f1.gradient(x)), tol);
    (lhs, rhs)
}

/// At a differentiable point the subdifferential is the singleton gradient:
/// the membership oracle must accept the selected subgradient and reject
/// seeded perturbations of it.
pub fn check_subderiv_singleton(f2: &NonsmoothFn, x: &Vector, tol: f64, seed: u64) -> Result<PropertyReport> {
    if !f2.is_smooth_at(x) {
        return Err(Error::AtKink(f2.name().to_string()));
    }
    let mut rng = Rng::new(seed);
    let mut report = ReportBuilder::new(
        "subderiv_singleton",
        tol,
        format!("perturbations={SINGLETON_PERTURBATIONS}, seed={seed}"),
    );
    let grad = f2.subgradient(x);
    let accepted = f2.subdiff_contains(x, &grad, tol);
    report.ge("gradient_accepted", x, &grad, f64::from(u8::from(accepted)), 1.0);
    for _ in 0..SINGLETON_PERTURBATIONS {
        let d = rng.unit_vector(x.dim());
        let size = (10.0 * tol).max(10f64.powf(rng.uniform(-3.0, 0.0)));
        let candidate = grad.axpy(size / d.norm_inf(), &d);
        let accepted = f2.subdiff_contains(x, &candidate, tol);
        report.le("perturbation_rejected", x, &candidate, f64::from(u8::from(accepted)), 0.0);
    }
    Ok(report.finish())
}
