//! Pointwise quantities from the second-order estimates: the trace
//! equivalence bound, the (†) combination, and an exterior-algebra trace.

use super::chart::HermitianMetricField;
use super::jet;
use super::kernel::Kernel;
use super::linalg::{trace_with, CMat};
use super::GeomError;
use num_complex::Complex64;

/// Outcome of the trace equivalence check at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEquivalence {
    /// `tr_ω ω0`.
    pub lhs: f64,
    /// `n C₁^{n−1} C` with `C₁ = tr_{ω0} ω` and `C` the two-sided volume ratio bound.
    pub bound: f64,
}

impl TraceEquivalence {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.bound + tol
    }
}

/// Evaluates both sides of `tr_ω ω0 ≤ n C₁^{n−1} C` at a point.
pub fn trace_equivalence(g0: &CMat, g: &CMat) -> Option<TraceEquivalence> {
    let n = g.dim();
    let c1 = trace_with(g0, g)?.re;
    let lhs = trace_with(g, g0)?.re;
    let ratio = g.det().re / g0.det().re;
    let c = ratio.max(1.0 / ratio);
    Some(TraceEquivalence { lhs, bound: n as f64 * c1.powi(n as i32 - 1) * c })
}

/// Third-order tensor `T_{ikq̄} = ∇⁰_i g_{kq̄}` at a point, `[(i * n + k) * n + q]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThirdOrder {
    pub n: usize,
    pub t: [Complex64; 8],
}

impl ThirdOrder {
    #[inline]
    pub fn get(&self, i: usize, k: usize, q: usize) -> Complex64 {
        self.t[(i * self.n + k) * self.n + q]
    }
}

/// The (†) combination
/// `−g0^{kl̄} g^{ij̄} g^{pq̄} T_{ikq̄} conj(T_{jlp̄}) / tr + |∂ tr|²_g / tr²`
/// with `tr = tr_{ω0} ω` and `∂_k tr = g0^{ab̄} T_{kab̄}`.
pub fn dagger(g0: &CMat, g: &CMat, t: &ThirdOrder) -> Option<f64> {
    let n = g.dim();
    let u0 = g0.upper_inverse()?;
    let u = g.upper_inverse()?;
    let tr = trace_with(g0, g)?.re;
    let mut quad = Complex64::new(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        for q in 0..n {
                            quad += u0.get(k, l) * u.get(i, j) * u.get(p, q) * t.get(i, k, q) * t.get(j, l, p).conj();
                        }
                    }
                }
            }
        }
    }
    let dtr: Vec<Complex64> = (0..n)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    s += u0.get(a, b) * t.get(k, a, b);
                }
            }
            s
        })
        .collect();
    let mut grad = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            grad += u.get(i, j) * dtr[i] * dtr[j].conj();
        }
    }
    Some(-quad.re / tr + grad.re / (tr * tr))
}

/// Maximum of (†) over a grid pair `(g0, g)`, with `∇⁰` from `g0`'s
/// Christoffel symbols.
pub fn dagger_field(
    kernel: &Kernel,
    g0: &HermitianMetricField,
    g: &HermitianMetricField,
) -> Result<f64, GeomError> {
    let n = kernel.chart().dim();
    let jets0 = kernel.jets(g0.matrices())?;
    let jets = kernel.jets(g.matrices())?;
    let mut worst = f64::NEG_INFINITY;
    for (index, (j0, j)) in jets0.iter().zip(&jets).enumerate() {
        let gamma0 = jet::christoffel(j0).ok_or(GeomError::SingularMetric { index })?;
        let mut t = ThirdOrder { n, t: [Complex64::new(0.0, 0.0); 8] };
        for i in 0..n {
            for k in 0..n {
                for q in 0..n {
                    let mut v = j.dg[i].get(k, q);
                    for p in 0..n {
                        v -= gamma0.get(p, i, k) * j.g.get(p, q);
                    }
                    t.t[(i * n + k) * n + q] = v;
                }
            }
        }
        let d = dagger(&j0.g, &j.g, &t).ok_or(GeomError::SingularMetric { index })?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Real 2-form on `C²` in the basis `(dz¹, dz̄¹, dz², dz̄²)`, as the
/// antisymmetric coefficient matrix of `Σ_{a<b} α_{ab} e_a ∧ e_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct TwoForm([[Complex64; 4]; 4]);

impl TwoForm {
    /// `√−1 Σ β_{ij̄} dz^i ∧ dz̄^j`.
    fn from_one_one(beta: &CMat) -> Self {
        let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                let v = Complex64::i() * beta.get(i, j);
                let (r, c) = (2 * i, 2 * j + 1);
                a[r][c] += v;
                a[c][r] -= v;
            }
        }
        TwoForm(a)
    }

    /// Coefficient of `e_0 ∧ e_1 ∧ e_2 ∧ e_3` in `self ∧ other`.
    fn wedge_top(&self, o: &TwoForm) -> Complex64 {
        let (a, b) = (&self.0, &o.0);
        a[0][1] * b[2][3] - a[0][2] * b[1][3] + a[0][3] * b[1][2] + a[1][2] * b[0][3] - a[1][3] * b[0][2]
            + a[2][3] * b[0][1]
    }
}

/// `n ω^{n−1} ∧ β / ωⁿ` at a point of `C²`, computed in the exterior algebra.
pub fn exterior_trace(g: &CMat, beta: &CMat) -> Option<Complex64> {
    if g.dim() != 2 {
        return None;
    }
    let w = TwoForm::from_one_one(g);
    let b = TwoForm::from_one_one(beta);
    let top = w.wedge_top(&w);
    if top.norm() == 0.0 {
        return None;
    }
    Some(2.0 * w.wedge_top(&b) / top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_trace_matches_contraction() {
        let g = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(2.0, 0.0),
            (0, 1) => Complex64::new(0.3, -0.7),
            (1, 0) => Complex64::new(0.3, 0.7),
            _ => Complex64::new(1.5, 0.0),
        });
        let b = CMat::from_fn(2, |i, j| Complex64::new((i + 2 * j) as f64 - 0.5, i as f64 - j as f64));
        let a = exterior_trace(&g, &b).unwrap();
        let t = trace_with(&g, &b).unwrap();
        assert!((a - t).norm() < 1e-12);
        let d = exterior_trace(&CMat::diag(&[1.0, 2.0]), &CMat::diag(&[3.0, 4.0])).unwrap();
        assert!((d.re - 5.0).abs() < 1e-14);
    }

    #[test]
    fn trace_equivalence_identity() {
        let e = trace_equivalence(&CMat::identity(2), &CMat::identity(2)).unwrap();
        assert!((e.lhs - 2.0).abs() < 1e-15 && (e.bound - 4.0).abs() < 1e-15);
    }

    #[test]
    fn dagger_nonpositive_for_symmetric_tensor() {
        let n = 2;
        let v = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)];
        let mut t = ThirdOrder { n, t: [Complex64::new(0.0, 0.0); 8] };
        for i in 0..n {
            for k in 0..n {
                t.t[(i * n + k) * n + k] += v[i];
                t.t[(i * n + k) * n + i] += v[k];
            }
        }
        let g = CMat::diag(&[1.0, 2.5]);
        let d = dagger(&CMat::identity(2), &g, &t).unwrap();
        assert!(d <= 1e-14, "{d}");
    }
}
