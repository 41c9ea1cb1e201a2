//! Fixed-size complex matrices for complex dimension 1 and 2.
//!
//! Every per-point quantity in the kernel (metric, inverse, Ricci form) is an
//! `n × n` complex matrix with `n ≤ 2`, so closed forms are used throughout:
//! determinant, inverse and the smallest Hermitian eigenvalue.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub const MAX_DIM: usize = 2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `n × n` complex matrix stored row-major in a 2×2 buffer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    a: [Complex64; 4],
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "complex dimension must be 1 or 2");
        Self { n, a: [ZERO; 4] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * MAX_DIM + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * MAX_DIM + j] = v;
    }

    pub fn det(&self) -> Complex64 {
        match self.n {
            1 => self.a[0],
            _ => self.a[0] * self.a[3] - self.a[1] * self.a[2],
        }
    }

    /// Matrix inverse; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let mut m = Self::zeros(self.n);
        match self.n {
            1 => m.a[0] = ONE / d,
            _ => {
                m.a[0] = self.a[3] / d;
                m.a[1] = -self.a[1] / d;
                m.a[2] = -self.a[2] / d;
                m.a[3] = self.a[0] / d;
            }
        }
        Some(m)
    }

    /// Upper-index inverse `g^{ij̄}` of a lower-index Hermitian form `g_{ij̄}`,
    /// laid out so that `Σ_j g^{ij̄} g_{kj̄} = δ_{ik}`. This is the transpose of
    /// the ordinary matrix inverse.
    pub fn upper_inverse(&self) -> Option<Self> {
        self.inverse().map(|m| m.transpose())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * s)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.a[..].iter().take(MAX_DIM * MAX_DIM).fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A_{ij} − conj(A_{ji})|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        match self.n {
            1 => [self.a[0].re, self.a[0].re],
            _ => {
                let a = self.a[0].re;
                let d = self.a[3].re;
                let b = 0.5 * (self.a[1] + self.a[2].conj());
                let mean = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
                [mean - rad, mean + rad]
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }

    /// Positive definite with smallest eigenvalue above `1e-10 × trace`.
    pub fn is_positive_definite(&self) -> bool {
        let tr = self.trace().re;
        let lam = self.min_eigenvalue();
        tr.is_finite() && lam.is_finite() && lam > 1e-10 * tr && lam > 0.0
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        CMat::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }
}

/// `tr_ω β = g^{ij̄} β_{ij̄}` for a metric `g` and a (1,1)-form `β` at one point.
pub fn trace_with(g: &CMat, beta: &CMat) -> Option<Complex64> {
    let inv = g.upper_inverse()?;
    let n = g.dim();
    let mut s = ZERO;
    for i in 0..n {
        for j in 0..n {
            s += inv.get(i, j) * beta.get(i, j);
        }
    }
    Some(s)
}
