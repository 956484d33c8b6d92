//! Dense real vectors and matrices, norms, spectral-norm estimation and a
//! seeded random generator.
//!
//! Constructors reject empty or non-finite data. Arithmetic helpers
//! (`add`, `sub`, `axpy`, ...) do not re-validate their output; iteration
//! drivers call [`Vector::ensure_finite`] on every iterate they produce.

use std::ops::Index;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A point of R^n with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        check_finite(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        Self::filled(dim, 0.0)
    }

    /// # Panics
    /// If `dim == 0` or `value` is not finite.
    pub fn filled(dim: usize, value: f64) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        assert!(value.is_finite(), "fill value must be finite");
        Self {
            entries: vec![value; dim],
        }
    }

    /// Standard basis vector `e_i` in R^dim.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[i] = 1.0;
        v
    }

    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        check_finite(&self.entries)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.entries.iter().map(|&v| f(v)).collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        Self::from_raw(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `self + alpha * x`
    pub fn axpy(&self, alpha: f64, x: &Self) -> Self {
        self.zip_with(x, |a, b| a + alpha * b)
    }

    /// `(1 - weight) * self + weight * other`
    pub fn lerp(&self, weight: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| (1.0 - weight) * a + weight * b)
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        dot(self, other)
    }

    pub fn norm2(&self) -> f64 {
        norm2(self)
    }

    pub fn norm1(&self) -> f64 {
        norm1(self)
    }

    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm2_sq(&self) -> f64 {
        dot_slices(&self.entries, &self.entries)
    }

    /// Squared Euclidean distance.
    pub fn dist_sq(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.entries
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(dot_slices(&a.entries, &b.entries))
}

pub fn norm2(a: &Vector) -> f64 {
    a.norm2_sq().sqrt()
}

pub fn norm1(a: &Vector) -> f64 {
    a.entries.iter().map(|v| v.abs()).sum()
}

/// Dense row-major real matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        check_dims(rows * cols, data.len())?;
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            check_dims(n_cols, row.len())?;
            data.extend(row);
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n]).expect("identity of positive size")
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `A x`
    pub fn matvec(&self, x: &Vector) -> Result<Vector> {
        check_dims(self.cols, x.dim())?;
        Ok(Vector::from_raw(
            (0..self.rows)
                .map(|i| dot_slices(self.row(i), x.as_slice()))
                .collect(),
        ))
    }

    /// `Aᵀ y` without forming the transpose.
    pub fn matvec_t(&self, y: &Vector) -> Result<Vector> {
        check_dims(self.rows, y.dim())?;
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(Vector::from_raw(out))
    }

    /// `AᵀA`
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..self.rows).map(|r| self.get(r, i) * self.get(r, j)).sum();
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

const STALL_ITERATIONS: usize = 2;
const PERTURBATION_SEED: u64 = 0x005e_ed0f_5bec;

/// Largest singular value of `a`, by power iteration on `AᵀA`.
///
/// Starts from the normalized all-ones vector. If the Rayleigh quotient stops
/// moving within the first couple of iterations (the start may be an
/// eigenvector of a smaller eigenvalue) the iteration is repeated from a
/// seeded perturbation of that start and the larger estimate is kept.
pub fn spectral_norm(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if a.is_zero() {
        return Ok(0.0);
    }
    let n = a.cols();
    let ones = Vector::filled(n, 1.0 / (n as f64).sqrt());
    let (lambda, iterations) = power_iteration_gram(a, ones, tol, max_iter)?;
    if iterations > STALL_ITERATIONS && lambda > 0.0 {
        return Ok(lambda.sqrt());
    }
    let mut rng = Rng::new(PERTURBATION_SEED);
    let perturbed = Vector::from_raw(
        (0..n)
            .map(|_| 1.0 + 0.5 * rng.standard_normal())
            .collect(),
    );
    let (retry, _) = power_iteration_gram(a, perturbed, tol, max_iter)?;
    Ok(lambda.max(retry).sqrt())
}

/// Returns `(λ_max(AᵀA) estimate, iterations used)`.
fn power_iteration_gram(a: &Matrix, start: Vector, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    let mut v = start.scale(1.0 / start.norm2());
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let w = a.matvec_t(&a.matvec(&v)?)?;
        let next = dot_slices(v.as_slice(), w.as_slice());
        let w_norm = w.norm2();
        if w_norm == 0.0 {
            // start vector lies in the null space
            return Ok((0.0, it));
        }
        v = w.scale(1.0 / w_norm);
        if it > 1 && (next - lambda).abs() <= tol * next.abs() {
            return Ok((next, it));
        }
        lambda = next;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        estimate: lambda.max(0.0).sqrt(),
    })
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    let n = s.rows();
    check_dims(n, s.cols())?;
    let mut m: Vec<f64> = s.as_slice().to_vec();
    let at = |i: usize, j: usize| i * n + j;
    let frob: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[at(i, j)] * m[at(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[at(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[at(q, q)] - m[at(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = m[at(k, p)];
                    let akq = m[at(k, q)];
                    m[at(k, p)] = c * akp - sn * akq;
                    m[at(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[at(p, k)];
                    let aqk = m[at(q, k)];
                    m[at(p, k)] = c * apk - sn * aqk;
                    m[at(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[at(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest eigenvalue of `AᵀA`, clamped to 0 for wide or numerically
/// rank-deficient `A`.
pub fn gram_min_eigenvalue(a: &Matrix) -> Result<f64> {
    if a.rows() < a.cols() {
        return Ok(0.0);
    }
    let eig = symmetric_eigenvalues(&a.gram())?;
    let max = eig.last().copied().unwrap_or(0.0);
    let min = eig[0];
    if min <= 1e-12 * max.max(f64::MIN_POSITIVE) {
        Ok(0.0)
    } else {
        Ok(min)
    }
}

/// Solves `M x = rhs` by Gaussian elimination with partial pivoting.
pub fn solve_linear(m: &Matrix, rhs: &Vector) -> Result<Vector> {
    let n = m.rows();
    check_dims(n, m.cols())?;
    check_dims(n, rhs.dim())?;
    let mut a = m.as_slice().to_vec();
    let mut b = rhs.as_slice().to_vec();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col].abs() <= 1e-12 * scale {
            return Err(Error::RankDeficient(format!("zero pivot in column {col}")));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for r in (col + 1)..n {
            let factor = a[r * n + col] / a[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[i * n + k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Vector::new(x)
}

/// Seeded, bit-reproducible random stream.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    pub fn normal_vector(&mut self, dim: usize) -> Vector {
        Vector::from_raw((0..dim).map(|_| self.standard_normal()).collect())
    }

    pub fn unit_vector(&mut self, dim: usize) -> Vector {
        loop {
            let v = self.normal_vector(dim);
            let n = v.norm2();
            if n > 1e-12 {
                return v.scale(1.0 / n);
            }
        }
    }

    /// Uniform sample from the closed Euclidean ball of `radius` at the origin.
    pub fn in_ball(&mut self, dim: usize, radius: f64) -> Vector {
        let dir = self.unit_vector(dim);
        let r = radius * self.uniform(0.0, 1.0).powf(1.0 / dim as f64);
        dir.scale(r)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols).map(|_| self.standard_normal()).collect();
        Matrix::new(rows, cols, data).expect("gaussian samples are finite")
    }
}
