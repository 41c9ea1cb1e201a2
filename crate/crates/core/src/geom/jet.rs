//! Point-local curvature algebra on a second-order jet of a metric.

use super::linalg::CMat;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Metric value and coordinate derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub g: CMat,
    /// `dg[k] = ∂_k g_{ij̄}`.
    pub dg: [CMat; 2],
    /// `dbar_g[l] = ∂_l̄ g_{ij̄}`.
    pub dbar_g: [CMat; 2],
    /// `ddbar_g[k][l] = ∂_k ∂_l̄ g_{ij̄}`.
    pub ddbar_g: [[CMat; 2]; 2],
}

impl MetricJet {
    pub fn constant(g: CMat) -> Self {
        let z = CMat::zeros(g.dim());
        Self { g, dg: [z; 2], dbar_g: [z; 2], ddbar_g: [[z; 2]; 2] }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.g = self.g.scale(s);
        for k in 0..2 {
            out.dg[k] = self.dg[k].scale(s);
            out.dbar_g[k] = self.dbar_g[k].scale(s);
            for l in 0..2 {
                out.ddbar_g[k][l] = self.ddbar_g[k][l].scale(s);
            }
        }
        out
    }

    /// `max |∂_k g_{ij̄} − ∂_i g_{kj̄}|`.
    pub fn kahler_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r = r.max((self.dg[k].get(i, j) - self.dg[i].get(k, j)).norm());
                }
            }
        }
        r
    }
}

/// `Γ^i_{kp}` at a point, stored `[(i * n + k) * n + p]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    c: [Complex64; 8],
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self { n, c: [ZERO; 8] }
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize, p: usize) -> Complex64 {
        self.c[(i * self.n + k) * self.n + p]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, p: usize, v: Complex64) {
        self.c[(i * self.n + k) * self.n + p] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `max |Γ^i_{kp} − Γ^i_{pk}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                for p in 0..n {
                    r = r.max((self.get(i, k, p) - self.get(i, p, k)).norm());
                }
            }
        }
        r
    }
}

/// `R_{ij̄kl̄}` at a point, stored `[((i * n + j) * n + k) * n + l]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Riemann {
    n: usize,
    r: [Complex64; 16],
}

impl Riemann {
    pub fn zeros(n: usize) -> Self {
        Self { n, r: [ZERO; 16] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let n = self.n;
        self.r[((i * n + j) * n + k) * n + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let n = self.n;
        self.r[((i * n + j) * n + k) * n + l] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `R_{ij̄k}^p = R_{ij̄kl̄} g^{pl̄}` as `[i][j][k][p]`.
    pub fn raise_last(&self, upper: &CMat) -> Riemann {
        let n = self.n;
        let mut out = Riemann::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for p in 0..n {
                        let v = (0..n).map(|l| self.get(i, j, k, l) * upper.get(p, l)).sum();
                        out.set(i, j, k, p, v);
                    }
                }
            }
        }
        out
    }

    /// Ricci contraction `g^{kl̄} R_{ij̄kl̄}`.
    pub fn contract(&self, upper: &CMat) -> CMat {
        let n = self.n;
        CMat::from_fn(n, |i, j| {
            let mut s = ZERO;
            for k in 0..n {
                for l in 0..n {
                    s += upper.get(k, l) * self.get(i, j, k, l);
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        let m = self.n.pow(4);
        self.r[..m].iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

/// Residuals of the Kähler curvature symmetries at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymmetryResiduals {
    /// `R_{ij̄kl̄} − R_{kj̄il̄}`.
    pub swap_holomorphic: f64,
    /// `R_{ij̄kl̄} − R_{il̄kj̄}`.
    pub swap_antiholomorphic: f64,
    /// `R_{ij̄kl̄} − R_{kl̄ij̄}`.
    pub swap_pairs: f64,
    /// `conj(R_{ij̄kl̄}) − R_{jīlk̄}`.
    pub conjugation: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.swap_holomorphic
            .max(self.swap_antiholomorphic)
            .max(self.swap_pairs)
            .max(self.conjugation)
    }

    pub fn merge(&self, o: &SymmetryResiduals) -> SymmetryResiduals {
        SymmetryResiduals {
            swap_holomorphic: self.swap_holomorphic.max(o.swap_holomorphic),
            swap_antiholomorphic: self.swap_antiholomorphic.max(o.swap_antiholomorphic),
            swap_pairs: self.swap_pairs.max(o.swap_pairs),
            conjugation: self.conjugation.max(o.conjugation),
        }
    }
}

pub fn symmetry_residuals(r: &Riemann) -> SymmetryResiduals {
    let n = r.dim();
    let mut s = SymmetryResiduals::default();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = r.get(i, j, k, l);
                    s.swap_holomorphic = s.swap_holomorphic.max((v - r.get(k, j, i, l)).norm());
                    s.swap_antiholomorphic = s.swap_antiholomorphic.max((v - r.get(i, l, k, j)).norm());
                    s.swap_pairs = s.swap_pairs.max((v - r.get(k, l, i, j)).norm());
                    s.conjugation = s.conjugation.max((v.conj() - r.get(j, i, l, k)).norm());
                }
            }
        }
    }
    s
}

/// `Γ^i_{kp} = g^{iq̄} ∂_k g_{pq̄}`; `None` for a singular metric.
pub fn christoffel(jet: &MetricJet) -> Option<Christoffel> {
    let n = jet.dim();
    let up = jet.g.upper_inverse()?;
    let mut out = Christoffel::zeros(n);
    for i in 0..n {
        for k in 0..n {
            for p in 0..n {
                let v = (0..n).map(|q| up.get(i, q) * jet.dg[k].get(p, q)).sum();
                out.set(i, k, p, v);
            }
        }
    }
    Some(out)
}

/// `R_{ij̄kl̄} = −∂_i∂_j̄ g_{kl̄} + g^{pq̄} ∂_i g_{kq̄} ∂_j̄ g_{pl̄}`.
pub fn curvature(jet: &MetricJet) -> Option<Riemann> {
    let n = jet.dim();
    let up = jet.g.upper_inverse()?;
    let mut out = Riemann::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = -jet.ddbar_g[i][j].get(k, l);
                    for p in 0..n {
                        for q in 0..n {
                            v += up.get(p, q) * jet.dg[i].get(k, q) * jet.dbar_g[j].get(p, l);
                        }
                    }
                    out.set(i, j, k, l, v);
                }
            }
        }
    }
    Some(out)
}

/// Ricci form by contracting the curvature tensor.
pub fn ricci(jet: &MetricJet) -> Option<CMat> {
    let up = jet.g.upper_inverse()?;
    Some(curvature(jet)?.contract(&up))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_jet_is_flat() {
        let g = CMat::diag(&[2.0, 0.5]);
        let j = MetricJet::constant(g);
        assert!(curvature(&j).unwrap().max_abs() == 0.0);
        assert_eq!(christoffel(&j).unwrap(), Christoffel::zeros(2));
    }
}
