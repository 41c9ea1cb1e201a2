//! Closed-form metrics evaluated with exact derivatives.

use super::jet::{christoffel, ricci, MetricJet};
use super::linalg::CMat;
use super::GeomError;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A metric given by a formula on a coordinate chart of `C^n`.
pub trait AnalyticMetric {
    fn dim(&self) -> usize;

    /// Value, first and mixed second derivatives at `z` (length `dim()`).
    fn jet(&self, z: &[Complex64]) -> MetricJet;

    fn metric(&self, z: &[Complex64]) -> CMat {
        self.jet(z).g
    }
}

/// Fubini-Study metric on the affine chart `U₀ ≅ C^n`:
/// `g_{ij̄} = ∂_i∂_j̄ log(1 + |z|²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FubiniStudy {
    pub n: usize,
}

impl AnalyticMetric for FubiniStudy {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet(&self, z: &[Complex64]) -> MetricJet {
        let n = self.n;
        let s = 1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let (s1, s2, s3, s4) = (1.0 / s, s.powi(-2), s.powi(-3), s.powi(-4));
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let zb = |a: usize| z[a].conj();
        let g = CMat::from_fn(n, |i, j| d(i, j) * s1 - zb(i) * z[j] * s2);
        let mut jet = MetricJet::constant(g);
        for k in 0..n {
            jet.dg[k] = CMat::from_fn(n, |i, j| {
                -d(i, j) * zb(k) * s2 - zb(i) * d(j, k) * s2 + 2.0 * zb(i) * z[j] * zb(k) * s3
            });
            jet.dbar_g[k] = CMat::from_fn(n, |i, j| {
                -d(i, j) * z[k] * s2 - d(i, k) * z[j] * s2 + 2.0 * zb(i) * z[j] * z[k] * s3
            });
            for l in 0..n {
                jet.ddbar_g[k][l] = CMat::from_fn(n, |i, j| {
                    let mut v = Complex64::new(-d(i, j) * d(k, l) * s2 - d(i, l) * d(j, k) * s2, 0.0);
                    v += 2.0 * d(i, j) * z[l] * zb(k) * s3;
                    v += 2.0 * d(i, l) * z[j] * zb(k) * s3;
                    v += 2.0 * zb(i) * (d(j, k) * z[l] + d(k, l) * z[j]) * s3;
                    v -= 6.0 * zb(i) * z[j] * z[l] * zb(k) * s4;
                    v
                });
            }
        }
        jet
    }
}

/// Constant Hermitian metric `A_{ij̄}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantMetric {
    pub a: CMat,
}

impl AnalyticMetric for ConstantMetric {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn jet(&self, _z: &[Complex64]) -> MetricJet {
        MetricJet::constant(self.a)
    }
}

/// Block-diagonal product of two one-dimensional metrics on `C × C`.
pub struct ProductMetric {
    pub first: Box<dyn AnalyticMetric + Send + Sync>,
    pub second: Box<dyn AnalyticMetric + Send + Sync>,
}

impl ProductMetric {
    pub fn new(
        first: Box<dyn AnalyticMetric + Send + Sync>,
        second: Box<dyn AnalyticMetric + Send + Sync>,
    ) -> Result<Self, GeomError> {
        if first.dim() != 1 || second.dim() != 1 {
            return Err(GeomError::InvalidTensor("product factors must be one-dimensional".into()));
        }
        Ok(Self { first, second })
    }
}

impl AnalyticMetric for ProductMetric {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, z: &[Complex64]) -> MetricJet {
        let a = self.first.jet(&z[..1]);
        let b = self.second.jet(&z[1..2]);
        let block = |x: Complex64, y: Complex64| {
            let mut m = CMat::zeros(2);
            m.set(0, 0, x);
            m.set(1, 1, y);
            m
        };
        let mut jet = MetricJet::constant(block(a.g.get(0, 0), b.g.get(0, 0)));
        jet.dg[0] = block(a.dg[0].get(0, 0), ZERO);
        jet.dg[1] = block(ZERO, b.dg[0].get(0, 0));
        jet.dbar_g[0] = block(a.dbar_g[0].get(0, 0), ZERO);
        jet.dbar_g[1] = block(ZERO, b.dbar_g[0].get(0, 0));
        jet.ddbar_g[0][0] = block(a.ddbar_g[0][0].get(0, 0), ZERO);
        jet.ddbar_g[1][1] = block(ZERO, b.ddbar_g[0][0].get(0, 0));
        jet
    }
}

/// Ricci form of an analytic metric at a point.
pub fn analytic_ricci(m: &dyn AnalyticMetric, z: &[Complex64]) -> Result<CMat, GeomError> {
    ricci(&m.jet(z)).ok_or(GeomError::SingularMetric { index: 0 })
}

/// Outcome of the holomorphic normal coordinate construction at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalCoordinateReport {
    /// `max |g(p) − I|` in the new coordinates.
    pub identity_residual: f64,
    /// `max |∂_k g_{ij̄}(p)|` and `max |∂_k̄ g_{ij̄}(p)|` in the new coordinates.
    pub derivative_residual: f64,
    /// Same quantity after the affine step only.
    pub affine_derivative: f64,
    /// Affine map `z = p + A w`.
    pub affine: CMat,
    /// Quadratic coefficients `Γ̃^i_{jk}(p)` of the second step.
    pub quadratic: super::jet::Christoffel,
}

/// Builds holomorphic normal coordinates at `p` in two steps: `z = p + A w` with
/// `Aᵀ g(p) Ā = I`, then `w^i = u^i − ½ Γ̃^i_{jk} u^j u^k`; reports the metric
/// derivatives at `p` in the `u` coordinates by the chain rule.
pub fn normal_coordinates_check(
    m: &dyn AnalyticMetric,
    p: &[Complex64],
) -> Result<NormalCoordinateReport, GeomError> {
    let n = m.dim();
    let jet = m.jet(p);
    if !jet.g.is_positive_definite() {
        return Err(GeomError::NotPositiveDefinite { index: 0, min_eig: jet.g.min_eigenvalue() });
    }
    let l = cholesky(&jet.g).ok_or(GeomError::SingularMetric { index: 0 })?;
    let a = l.inverse().ok_or(GeomError::SingularMetric { index: 0 })?.transpose();

    // Pulled-back jet: g̃_{ij̄}(w) = A_{ki} conj(A_{lj}) g_{kl̄}(p + Aw).
    let pull = |mat: &CMat| -> CMat { a.transpose() * *mat * conj(&a) };
    let g_t = pull(&jet.g);
    let mut dg_t = [CMat::zeros(n); 2];
    let mut dbar_t = [CMat::zeros(n); 2];
    for c in 0..n {
        let mut acc = CMat::zeros(n);
        let mut accb = CMat::zeros(n);
        for r in 0..n {
            acc = acc + scale_c(&jet.dg[r], a.get(r, c));
            accb = accb + scale_c(&jet.dbar_g[r], a.get(r, c).conj());
        }
        dg_t[c] = pull(&acc);
        dbar_t[c] = pull(&accb);
    }
    let affine_jet = MetricJet { g: g_t, dg: dg_t, dbar_g: dbar_t, ddbar_g: [[CMat::zeros(n); 2]; 2] };
    let gamma = christoffel(&affine_jet).ok_or(GeomError::SingularMetric { index: 0 })?;

    let mut affine_derivative: f64 = 0.0;
    let mut derivative_residual: f64 = 0.0;
    for c in 0..n {
        for a_ in 0..n {
            for b in 0..n {
                affine_derivative = affine_derivative.max(dg_t[c].get(a_, b).norm());
                // ∂_c ĝ_{ab̄} = ∂_c g̃_{ab̄} − ½ Σ_i (Γ̃^i_{ac} + Γ̃^i_{ca}) g̃_{ib̄}
                let mut d = dg_t[c].get(a_, b);
                let mut db = dbar_t[c].get(a_, b);
                for i in 0..n {
                    d -= 0.5 * (gamma.get(i, a_, c) + gamma.get(i, c, a_)) * g_t.get(i, b);
                    db -= 0.5 * (gamma.get(i, b, c) + gamma.get(i, c, b)).conj() * g_t.get(a_, i);
                }
                derivative_residual = derivative_residual.max(d.norm()).max(db.norm());
            }
        }
    }
    Ok(NormalCoordinateReport {
        identity_residual: (g_t - CMat::identity(n)).max_abs(),
        derivative_residual,
        affine_derivative,
        affine: a,
        quadratic: gamma,
    })
}

/// Max `|∂_j̄ X^i|` at `z` for a vector field given by a closure, by centered
/// differences with step `h`. Holomorphic fields give `O(h²)`.
pub fn holomorphic_residual(x: impl Fn(&[Complex64]) -> Vec<Complex64>, z: &[Complex64], h: f64) -> f64 {
    let n = z.len();
    let mut r: f64 = 0.0;
    for j in 0..n {
        let shift = |dz: Complex64| {
            let mut w = z.to_vec();
            w[j] += dz;
            x(&w)
        };
        let (xp, xm) = (shift(Complex64::new(h, 0.0)), shift(Complex64::new(-h, 0.0)));
        let (yp, ym) = (shift(Complex64::new(0.0, h)), shift(Complex64::new(0.0, -h)));
        for i in 0..n {
            let dx = (xp[i] - xm[i]) / (2.0 * h);
            let dy = (yp[i] - ym[i]) / (2.0 * h);
            r = r.max((0.5 * (dx + Complex64::i() * dy)).norm());
        }
    }
    r
}

fn conj(m: &CMat) -> CMat {
    CMat::from_fn(m.dim(), |i, j| m.get(i, j).conj())
}

fn scale_c(m: &CMat, s: Complex64) -> CMat {
    CMat::from_fn(m.dim(), |i, j| m.get(i, j) * s)
}

/// Lower-triangular `L` with `g = L L*` for Hermitian positive `g`.
pub(crate) fn cholesky(g: &CMat) -> Option<CMat> {
    let n = g.dim();
    let mut l = CMat::zeros(n);
    let l00 = g.get(0, 0).re;
    if l00 <= 0.0 {
        return None;
    }
    let l00 = l00.sqrt();
    l.set(0, 0, Complex64::new(l00, 0.0));
    if n == 2 {
        let l10 = g.get(1, 0) / l00;
        let rest = g.get(1, 1).re - l10.norm_sqr();
        if rest <= 0.0 {
            return None;
        }
        l.set(1, 0, l10);
        l.set(1, 1, Complex64::new(rest.sqrt(), 0.0));
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fubini_study_values_at_one() {
        let fs = FubiniStudy { n: 1 };
        let jet = fs.jet(&[c(1.0, 0.0)]);
        assert!((jet.g.get(0, 0) - c(0.25, 0.0)).norm() < 1e-15);
        assert!((jet.dg[0].get(0, 0) - c(-0.25, 0.0)).norm() < 1e-15);
        let gamma = christoffel(&jet).unwrap();
        assert!((gamma.get(0, 0, 0) - c(-1.0, 0.0)).norm() < 1e-14);
        let gamma0 = christoffel(&fs.jet(&[c(0.0, 0.0)])).unwrap();
        assert!(gamma0.get(0, 0, 0).norm() < 1e-15);
    }

    #[test]
    fn fubini_study_curvature_at_origin() {
        let fs = FubiniStudy { n: 1 };
        let r = super::super::jet::curvature(&fs.jet(&[c(0.0, 0.0)])).unwrap();
        assert!((r.get(0, 0, 0, 0) - c(2.0, 0.0)).norm() < 1e-14);
        let ric = analytic_ricci(&fs, &[c(1.0, 0.0)]).unwrap();
        assert!((ric.get(0, 0) - c(0.5, 0.0)).norm() < 1e-14);
    }

    /// Jet derivatives against centered differences of the metric values.
    fn check_jet_by_differences(m: &dyn AnalyticMetric, z: &[Complex64]) {
        let n = m.dim();
        let h = 1e-5;
        let jet = m.jet(z);
        let shifted = |k: usize, dz: Complex64| {
            let mut w = z.to_vec();
            w[k] += dz;
            m.jet(&w)
        };
        for k in 0..n {
            let xp = shifted(k, c(h, 0.0));
            let xm = shifted(k, c(-h, 0.0));
            let yp = shifted(k, c(0.0, h));
            let ym = shifted(k, c(0.0, -h));
            for i in 0..n {
                for j in 0..n {
                    let dx = (xp.g.get(i, j) - xm.g.get(i, j)) / (2.0 * h);
                    let dy = (yp.g.get(i, j) - ym.g.get(i, j)) / (2.0 * h);
                    let dk = 0.5 * (dx - Complex64::i() * dy);
                    let dkb = 0.5 * (dx + Complex64::i() * dy);
                    assert!((dk - jet.dg[k].get(i, j)).norm() < 1e-8);
                    assert!((dkb - jet.dbar_g[k].get(i, j)).norm() < 1e-8);
                    for l in 0..n {
                        let dx = (xp.dbar_g[l].get(i, j) - xm.dbar_g[l].get(i, j)) / (2.0 * h);
                        let dy = (yp.dbar_g[l].get(i, j) - ym.dbar_g[l].get(i, j)) / (2.0 * h);
                        let dkl = 0.5 * (dx - Complex64::i() * dy);
                        assert!((dkl - jet.ddbar_g[k][l].get(i, j)).norm() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn fubini_study_jet_matches_differences() {
        check_jet_by_differences(&FubiniStudy { n: 1 }, &[c(0.7, -0.4)]);
        check_jet_by_differences(&FubiniStudy { n: 2 }, &[c(0.3, 0.9), c(-1.1, 0.2)]);
        let prod = ProductMetric::new(Box::new(FubiniStudy { n: 1 }), Box::new(FubiniStudy { n: 1 })).unwrap();
        check_jet_by_differences(&prod, &[c(0.5, 0.5), c(-0.2, 1.3)]);
    }

    #[test]
    fn normal_coordinates_constant_metric() {
        let a = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => c(2.0, 0.0),
            (0, 1) => c(0.5, 0.5),
            (1, 0) => c(0.5, -0.5),
            _ => c(3.0, 0.0),
        });
        let r = normal_coordinates_check(&ConstantMetric { a }, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(r.identity_residual < 1e-14);
        assert_eq!(r.derivative_residual, 0.0);
    }

    #[test]
    fn holomorphic_field_residual() {
        let hol = |z: &[Complex64]| vec![z[0] * z[0] + 1.0];
        let anti = |z: &[Complex64]| vec![z[0].conj()];
        assert!(holomorphic_residual(hol, &[c(0.3, 0.2)], 1e-4) < 1e-8);
        assert!((holomorphic_residual(anti, &[c(0.3, 0.2)], 1e-4) - 1.0).abs() < 1e-8);
    }
}
