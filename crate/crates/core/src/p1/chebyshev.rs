//! Chebyshev-Lobatto collocation on `x ∈ [−1, 1]`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct ChebyshevGrid {
    /// `x_j = cos(πj/N)`, so `x_0 = 1`.
    pub x: DVector<f64>,
    /// First-derivative matrix.
    pub diff: DMatrix<f64>,
    /// Clenshaw-Curtis weights, `Σ w_j f(x_j) ≈ ∫ f dx`.
    pub weights: DVector<f64>,
    bary: Vec<f64>,
}

impl ChebyshevGrid {
    /// `degree + 1` nodes; `degree ≥ 2`.
    pub fn new(degree: usize) -> Self {
        let n = degree;
        let x = DVector::from_fn(n + 1, |j, _| (PI * j as f64 / n as f64).cos());
        let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
        let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut diff = DMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    diff[(i, j)] = c(i) / c(j) * sign(i + j) / (x[i] - x[j]);
                }
            }
        }
        // Diagonal from the row sums, which is more accurate than the closed form.
        for i in 0..=n {
            let s: f64 = (0..=n).filter(|&j| j != i).map(|j| diff[(i, j)]).sum();
            diff[(i, i)] = -s;
        }
        let weights = clenshaw_curtis(n);
        let bary = (0..=n).map(|j| sign(j) / c(j)).collect();
        Self { x, diff, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.x.len() - 1
    }

    pub fn integrate(&self, f: &DVector<f64>) -> f64 {
        self.weights.dot(f)
    }

    /// Barycentric interpolation of the nodal values at `at`.
    pub fn interpolate(&self, f: &DVector<f64>, at: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..self.len() {
            let d = at - self.x[j];
            if d == 0.0 {
                return f[j];
            }
            let w = self.bary[j] / d;
            num += w * f[j];
            den += w;
        }
        num / den
    }

    /// Chebyshev coefficients `f = Σ a_k T_k`.
    pub fn coefficients(&self, f: &DVector<f64>) -> Vec<f64> {
        let n = self.degree();
        let half = |j: usize| if j == 0 || j == n { 0.5 } else { 1.0 };
        (0..=n)
            .map(|k| {
                let s: f64 = (0..=n).map(|j| half(j) * f[j] * (PI * (j * k) as f64 / n as f64).cos()).sum();
                s * 2.0 / n as f64 * half(k)
            })
            .collect()
    }

    /// `d/dx (1 − x²) d/dx` applied exactly to the interpolating polynomial,
    /// through its Chebyshev coefficients. Collocating the product instead
    /// would annihilate `T_N`, whose derivative vanishes at interior nodes.
    /// Eigenvalues are `−l(l+1)`, `l = 0..=N`.
    pub fn legendre_operator(&self) -> DMatrix<f64> {
        let n = self.degree();
        let mut op = DMatrix::zeros(n + 1, n + 1);
        for col in 0..=n {
            let mut unit = DVector::zeros(n + 1);
            unit[col] = 1.0;
            let a = self.coefficients(&unit);
            let da = derivative_coefficients(&a);
            let weighted: Vec<f64> = {
                let x2 = mul_x(&mul_x(&da));
                let mut w = vec![0.0; x2.len()];
                for (k, v) in da.iter().enumerate() {
                    w[k] += v;
                }
                for (k, v) in x2.iter().enumerate() {
                    w[k] -= v;
                }
                w
            };
            let out = derivative_coefficients(&weighted);
            for j in 0..=n {
                let theta = PI * j as f64 / n as f64;
                op[(j, col)] = out.iter().enumerate().map(|(k, c)| c * (k as f64 * theta).cos()).sum();
            }
        }
        op
    }
}

/// Coefficients of `f'` from those of `f`.
fn derivative_coefficients(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n + 1];
    for k in (1..n).rev() {
        b[k - 1] = b[k + 1] + 2.0 * k as f64 * a[k];
    }
    b[0] *= 0.5;
    b.truncate(n.saturating_sub(1).max(1));
    b
}

/// Coefficients of `x f`, using `x T_k = (T_{k+1} + T_{|k−1|})/2`.
fn mul_x(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + 1];
    for (k, v) in a.iter().enumerate() {
        out[k + 1] += 0.5 * v;
        out[k.abs_diff(1)] += 0.5 * v;
    }
    out
}

fn clenshaw_curtis(n: usize) -> DVector<f64> {
    let theta = |j: usize| PI * j as f64 / n as f64;
    let mut w = DVector::zeros(n + 1);
    for j in 0..=n {
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (k * k) as f64 - 1.0) * (2.0 * k as f64 * theta(j)).cos();
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        w[j] = c / n as f64 * (1.0 - s);
    }
    w
}

/// `P_l(x)` by the three-term recurrence.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 1..l {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}
