//! Proximal operators: closed-form evaluation, the optimality-condition check
//! `x − u ∈ t·∂g(u)`, and a brute-force 1-D grid oracle.

use crate::error::{Error, Result};
use crate::numkernel::Vector;
use crate::objectives::NonsmoothFn;

/// `prox_{t·g}(x)`: the minimizer of `t·g(u) + ½‖u − x‖²`.
#[derive(Debug, Clone)]
pub struct ProxQuery<'a> {
    func: &'a NonsmoothFn,
    x: Vector,
    t: f64,
}

impl<'a> ProxQuery<'a> {
    pub fn new(func: &'a NonsmoothFn, x: Vector, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("prox scale must be positive, got {t}")));
        }
        if x.dim() != func.dim() {
            return Err(Error::DimensionMismatch {
                expected: func.dim(),
                got: x.dim(),
            });
        }
        Ok(Self { func, x, t })
    }

    pub fn func(&self) -> &NonsmoothFn {
        self.func
    }

    pub fn anchor(&self) -> &Vector {
        &self.x
    }

    pub fn scale(&self) -> f64 {
        self.t
    }
}

/// Evaluates the instance's closed-form prox. There is no numeric fallback:
/// functions without one yield [`Error::NoProx`].
pub fn prox_point(q: &ProxQuery<'_>) -> Result<Vector> {
    q.func.prox(&q.x, q.t)
}

/// Whether `u` satisfies the prox optimality condition `x − u ∈ t·∂g(u)`,
/// i.e. `(x − u)/t ∈ ∂g(u)` with the tolerance rescaled by `1/t`.
pub fn verify_prox_via_subgradient(q: &ProxQuery<'_>, u: &Vector, tol: f64) -> bool {
    if u.dim() != q.x.dim() {
        return false;
    }
    let g = q.x.sub(u).scale(1.0 / q.t);
    q.func.subdiff_contains(u, &g, tol / q.t)
}

/// Grid argmin of `t·g(u) + ½(u − x)²` over `u = lo + i·step` in `[lo, hi]`.
/// Fails when the argmin lands on either end of the window.
pub fn prox_oracle_1d(g: impl Fn(f64) -> f64, x: f64, t: f64, lo: f64, hi: f64, step: f64) -> Result<f64> {
    if !(lo < hi) || !(step > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lo < hi, step > 0, t > 0 (got lo={lo}, hi={hi}, step={step}, t={t})"
        )));
    }
    let count = ((hi - lo) / step).floor() as usize;
    let objective = |u: f64| t * g(u) + 0.5 * (u - x) * (u - x);
    let (best, _) = (0..=count)
        .map(|i| (i, objective(lo + i as f64 * step)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let argmin = lo + best as f64 * step;
    if best == 0 || best == count {
        return Err(Error::WindowTooSmall { argmin, lo, hi });
    }
    Ok(argmin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::Rng;
    use crate::objectives::{make_abs_1d, make_quadratic_penalty, make_scaled_l1, make_zero};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    #[test]
    fn prox_of_zero_is_identity() {
        let g = make_zero(3).unwrap();
        let x = v(&[1.0, -2.0, 0.5]);
        let q = ProxQuery::new(&g, x.clone(), 0.7).unwrap();
        assert_eq!(prox_point(&q).unwrap(), x);
    }

    #[test]
    fn prox_of_quadratic_penalty() {
        let g = make_quadratic_penalty(1.0, 1).unwrap();
        let q = ProxQuery::new(&g, v(&[2.0]), 1.0).unwrap();
        let u = prox_point(&q).unwrap();
        assert_eq!(u, v(&[1.0]));
        assert!(verify_prox_via_subgradient(&q, &u, 1e-12));
    }

    #[test]
    fn query_validation() {
        let g = make_abs_1d();
        assert!(ProxQuery::new(&g, v(&[1.0]), 0.0).is_err());
        assert!(ProxQuery::new(&g, v(&[1.0, 2.0]), 1.0).is_err());
    }

    #[test]
    fn verify_scalar_examples() {
        let g = make_abs_1d();
        let q = ProxQuery::new(&g, v(&[3.0]), 1.0).unwrap();
        assert!(verify_prox_via_subgradient(&q, &v(&[2.0]), 0.0));
        assert!(!verify_prox_via_subgradient(&q, &v(&[2.5]), 0.0));
    }

    #[test]
    fn l1_prox_passes_optimality_check() {
        let g = make_scaled_l1(0.8, 5).unwrap();
        let mut rng = Rng::new(21);
        for _ in 0..50 {
            let x = rng.in_ball(5, 3.0);
            let t = rng.uniform(0.1, 2.0);
            let q = ProxQuery::new(&g, x, t).unwrap();
            let u = prox_point(&q).unwrap();
            assert!(verify_prox_via_subgradient(&q, &u, 1e-12));
        }
    }

    #[test]
    fn grid_oracle_examples() {
        let step = 1e-4;
        let u = prox_oracle_1d(|_| 0.0, 1.7, 1.0, -10.0, 10.0, step).unwrap();
        assert!((u - 1.7).abs() <= step);
        let u = prox_oracle_1d(f64::abs, 3.0, 1.0, -10.0, 10.0, step).unwrap();
        assert!((u - 2.0).abs() <= step);
        let u = prox_oracle_1d(f64::abs, 0.5, 1.0, -10.0, 10.0, step).unwrap();
        assert!(u.abs() <= step);
    }

    #[test]
    fn grid_oracle_rejects_small_window() {
        assert!(matches!(
            prox_oracle_1d(|_| 0.0, 5.0, 1.0, -1.0, 1.0, 1e-3),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(prox_oracle_1d(|_| 0.0, 0.0, 1.0, 1.0, -1.0, 1e-3).is_err());
    }

    #[test]
    fn prox_is_nonexpansive() {
        let mut rng = Rng::new(22);
        let gs = [
            make_scaled_l1(1.3, 4).unwrap(),
            make_zero(4).unwrap(),
            make_quadratic_penalty(0.5, 4).unwrap(),
        ];
        for g in &gs {
            for _ in 0..100 {
                let t = rng.uniform(0.1, 3.0);
                let x1 = rng.in_ball(4, 10.0);
                let x2 = rng.in_ball(4, 10.0);
                let p1 = g.prox(&x1, t).unwrap();
                let p2 = g.prox(&x2, t).unwrap();
                assert!(p1.sub(&p2).norm2() <= x1.sub(&x2).norm2() + 1e-12);
            }
        }
    }
}
