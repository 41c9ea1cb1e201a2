//! Grid operations: derivatives, curvature, traces and covariant derivatives of
//! fields on one chart.

use super::chart::{
    ComplexField, GridChart, HermitianMetricField, MatrixField, OneOneFormField, ScalarField,
};
use super::jet::{self, Christoffel, MetricJet, Riemann, SymmetryResiduals};
use super::linalg::{trace_with, CMat};
use super::spectral::{Deriv, Differentiator, Scheme};
use super::GeomError;
use num_complex::Complex64;

/// Kähler residual above which curvature results are flagged.
pub const KAHLER_WARN_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ChristoffelField {
    chart: GridChart,
    data: Vec<Christoffel>,
}

impl ChristoffelField {
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn at(&self, p: usize) -> &Christoffel {
        &self.data[p]
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.symmetry_residual()))
    }

    pub fn sup_abs(&self) -> f64 {
        let n = self.chart.dim();
        let mut m: f64 = 0.0;
        for c in &self.data {
            for i in 0..n {
                for k in 0..n {
                    for p in 0..n {
                        m = m.max(c.get(i, k, p).norm());
                    }
                }
            }
        }
        m
    }

    /// Component `Γ^i_{kp}` as a field.
    pub fn component(&self, i: usize, k: usize, p: usize) -> ComplexField {
        ComplexField::from_vec_unchecked(self.chart, self.data.iter().map(|c| c.get(i, k, p)).collect())
    }
}

#[derive(Clone, Debug)]
pub struct CurvatureField {
    chart: GridChart,
    tensors: Vec<Riemann>,
    ricci: OneOneFormField,
    kahler_residual: f64,
}

impl CurvatureField {
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn at(&self, p: usize) -> &Riemann {
        &self.tensors[p]
    }

    /// Contraction `g^{kl̄} R_{ij̄kl̄}`.
    pub fn contracted(&self) -> &OneOneFormField {
        &self.ricci
    }

    pub fn kahler_residual(&self) -> f64 {
        self.kahler_residual
    }

    /// Set when the source metric was not Kähler to tolerance; the symmetries
    /// are then not expected to hold.
    pub fn non_kahler_warning(&self) -> bool {
        self.kahler_residual > KAHLER_WARN_TOL
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        self.tensors
            .iter()
            .fold(SymmetryResiduals::default(), |acc, r| acc.merge(&jet::symmetry_residuals(r)))
    }
}

/// Which of the four basic tensor types a field of components is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorKind {
    /// `X^i`
    Vector,
    /// `Y^ī`
    AntiVector,
    /// `a_i`
    Form,
    /// `b_ī`
    AntiForm,
}

#[derive(Clone, Debug)]
pub struct TensorField {
    pub kind: TensorKind,
    pub comps: Vec<ComplexField>,
}

/// `holo[k * n + i] = ∇_k T_i`, `anti[l * n + i] = ∇_l̄ T_i`.
#[derive(Clone, Debug)]
pub struct CovariantDerivative {
    pub holo: Vec<ComplexField>,
    pub anti: Vec<ComplexField>,
}

pub struct Kernel {
    diff: Differentiator,
}

impl Kernel {
    pub fn new(chart: GridChart, scheme: Scheme) -> Self {
        Self { diff: Differentiator::new(chart, scheme) }
    }

    pub fn spectral(chart: GridChart) -> Self {
        Self::new(chart, Scheme::Spectral)
    }

    pub fn chart(&self) -> &GridChart {
        self.diff.chart()
    }

    pub fn differentiator(&self) -> &Differentiator {
        &self.diff
    }

    pub fn diff(&self, f: &ComplexField, d: Deriv) -> Result<ComplexField, GeomError> {
        self.diff.diff(f, d)
    }

    pub fn diff_scalar(&self, f: &ScalarField, d: Deriv) -> Result<ComplexField, GeomError> {
        self.diff.diff_real(f, d)
    }

    /// `∂∂̄f` as a real (1,1)-form.
    pub fn ddbar(&self, f: &ScalarField) -> Result<OneOneFormField, GeomError> {
        let comps = self.diff.ddbar(f)?;
        Ok(OneOneFormField::real_unchecked(MatrixField::from_components(*self.chart(), &comps)?))
    }

    /// `g = g0 + ∂∂̄φ`, checked for positivity.
    pub fn metric_from_potential(
        &self,
        g0: &HermitianMetricField,
        phi: &ScalarField,
    ) -> Result<HermitianMetricField, GeomError> {
        self.chart().check(g0.chart())?;
        let dd = self.ddbar(phi)?;
        HermitianMetricField::new(g0.matrices().add(dd.matrices())?)
    }

    /// Per-point value and derivatives of a matrix field.
    pub fn jets(&self, g: &MatrixField) -> Result<Vec<MetricJet>, GeomError> {
        self.chart().check(g.chart())?;
        let n = self.chart().dim();
        let mut jets: Vec<MetricJet> = g.data().iter().map(|m| MetricJet::constant(*m)).collect();
        for i in 0..n {
            for j in 0..n {
                let s = self.diff.forward(&g.component(i, j))?;
                for k in 0..n {
                    let dk = self.diff.apply(&s, Deriv::Holo(k))?;
                    let dkb = self.diff.apply(&s, Deriv::Anti(k))?;
                    for (p, jet) in jets.iter_mut().enumerate() {
                        jet.dg[k].set(i, j, dk.values()[p]);
                        jet.dbar_g[k].set(i, j, dkb.values()[p]);
                    }
                    for l in 0..n {
                        let dkl = self.diff.apply_mixed(&s, k, l)?;
                        for (p, jet) in jets.iter_mut().enumerate() {
                            jet.ddbar_g[k][l].set(i, j, dkl.values()[p]);
                        }
                    }
                }
            }
        }
        Ok(jets)
    }

    pub fn christoffel(&self, g: &HermitianMetricField) -> Result<ChristoffelField, GeomError> {
        let jets = self.jets(g.matrices())?;
        let data = jets
            .iter()
            .enumerate()
            .map(|(index, j)| jet::christoffel(j).ok_or(GeomError::SingularMetric { index }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChristoffelField { chart: *self.chart(), data })
    }

    pub fn curvature(&self, g: &HermitianMetricField) -> Result<CurvatureField, GeomError> {
        let jets = self.jets(g.matrices())?;
        let mut tensors = Vec::with_capacity(jets.len());
        let mut ric = Vec::with_capacity(jets.len());
        let mut kahler: f64 = 0.0;
        for (index, j) in jets.iter().enumerate() {
            let r = jet::curvature(j).ok_or(GeomError::SingularMetric { index })?;
            let up = j.g.upper_inverse().ok_or(GeomError::SingularMetric { index })?;
            ric.push(r.contract(&up));
            tensors.push(r);
            kahler = kahler.max(j.kahler_residual());
        }
        Ok(CurvatureField {
            chart: *self.chart(),
            tensors,
            ricci: OneOneFormField::complex(MatrixField::from_vec_unchecked(*self.chart(), ric)),
            kahler_residual: kahler,
        })
    }

    /// `log det g` as a real field.
    pub fn log_det(&self, g: &HermitianMetricField) -> Result<ScalarField, GeomError> {
        let vals = g
            .matrices()
            .data()
            .iter()
            .enumerate()
            .map(|(index, m)| {
                let d = m.det().re;
                if d > 0.0 {
                    Ok(d.ln())
                } else {
                    Err(GeomError::SingularMetric { index })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScalarField::from_vec_unchecked(*self.chart(), vals))
    }

    /// Ricci form `−∂∂̄ log det g`.
    pub fn ricci(&self, g: &HermitianMetricField) -> Result<OneOneFormField, GeomError> {
        self.chart().check(g.chart())?;
        let dd = self.ddbar(&self.log_det(g)?)?;
        Ok(OneOneFormField::real_unchecked(dd.matrices().scale(-1.0)))
    }

    /// `max |∂_k g_{ij̄} − ∂_i g_{kj̄}|` over the grid.
    pub fn kahler_residual(&self, g: &MatrixField) -> Result<f64, GeomError> {
        self.chart().check(g.chart())?;
        let n = self.chart().dim();
        if n == 1 {
            return Ok(0.0);
        }
        let mut r: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                for k in 0..i {
                    let a = self.diff.diff(&g.component(i, j), Deriv::Holo(k))?;
                    let b = self.diff.diff(&g.component(k, j), Deriv::Holo(i))?;
                    r = r.max(a.sup_abs_diff(&b)?);
                }
            }
        }
        Ok(r)
    }

    /// `max |∂_k R_{ij̄} − ∂_i R_{kj̄}|` together with the conjugate condition.
    pub fn closedness_residual(&self, form: &OneOneFormField) -> Result<f64, GeomError> {
        self.kahler_residual(form.matrices())
    }

    /// `tr_ω β = g^{ij̄} β_{ij̄}` (complex in general).
    pub fn trace_complex(
        &self,
        g: &HermitianMetricField,
        beta: &OneOneFormField,
    ) -> Result<ComplexField, GeomError> {
        self.chart().check(g.chart())?;
        self.chart().check(beta.chart())?;
        let vals = (0..self.chart().len())
            .map(|p| trace_with(g.at(p), beta.at(p)).ok_or(GeomError::SingularMetric { index: p }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComplexField::from_vec_unchecked(*self.chart(), vals))
    }

    /// Real trace of a real (1,1)-form.
    pub fn trace(&self, g: &HermitianMetricField, beta: &OneOneFormField) -> Result<ScalarField, GeomError> {
        Ok(self.trace_complex(g, beta)?.real_part())
    }

    /// `Δf = g^{ij̄} ∂_i∂_j̄ f`.
    pub fn laplacian(&self, g: &HermitianMetricField, f: &ScalarField) -> Result<ScalarField, GeomError> {
        self.trace(g, &self.ddbar(f)?)
    }

    /// `|∂f|²_g = g^{ij̄} ∂_i f ∂_j̄ f` for real `f`.
    pub fn grad_norm_sq(&self, g: &HermitianMetricField, f: &ScalarField) -> Result<ScalarField, GeomError> {
        self.chart().check(g.chart())?;
        let n = self.chart().dim();
        let s = self.diff.forward_real(f)?;
        let d: Vec<ComplexField> =
            (0..n).map(|i| self.diff.apply(&s, Deriv::Holo(i))).collect::<Result<_, _>>()?;
        let vals = (0..self.chart().len())
            .map(|p| {
                let up = g.at(p).upper_inverse().ok_or(GeomError::SingularMetric { index: p })?;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += (up.get(i, j) * d[i].values()[p] * d[j].values()[p].conj()).re;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>, GeomError>>()?;
        Ok(ScalarField::from_vec_unchecked(*self.chart(), vals))
    }

    /// Density of `ωⁿ` against `dx¹dy¹⋯`: `2ⁿ n! det g`.
    pub fn volume_density(&self, g: &HermitianMetricField) -> ScalarField {
        let n = g.dim();
        let c = volume_constant(n);
        ScalarField::from_vec_unchecked(*g.chart(), g.matrices().data().iter().map(|m| c * m.det().re).collect())
    }

    pub fn volume(&self, g: &HermitianMetricField) -> f64 {
        self.volume_density(g).integral()
    }

    /// Covariant derivative of a vector field or a one-form, either type.
    pub fn covariant_derivative(
        &self,
        g: &HermitianMetricField,
        t: &TensorField,
    ) -> Result<CovariantDerivative, GeomError> {
        let n = self.chart().dim();
        if t.comps.len() != n {
            return Err(GeomError::UnsupportedRank(format!(
                "{} components for a rank-one tensor in dimension {n}",
                t.comps.len()
            )));
        }
        for c in &t.comps {
            self.chart().check(c.chart())?;
        }
        let gamma = self.christoffel(g)?;
        let len = self.chart().len();
        let mut holo = Vec::with_capacity(n * n);
        let mut anti = Vec::with_capacity(n * n);
        let specs: Vec<_> = t.comps.iter().map(|c| self.diff.forward(c)).collect::<Result<_, _>>()?;
        for k in 0..n {
            for i in 0..n {
                let mut dh = self.diff.apply(&specs[i], Deriv::Holo(k))?;
                let mut da = self.diff.apply(&specs[i], Deriv::Anti(k))?;
                for p in 0..len {
                    let gm = gamma.at(p);
                    let mut corr_h = Complex64::new(0.0, 0.0);
                    let mut corr_a = Complex64::new(0.0, 0.0);
                    for q in 0..n {
                        let tq = t.comps[q].values()[p];
                        match t.kind {
                            TensorKind::Vector => corr_h += gm.get(i, k, q) * tq,
                            TensorKind::Form => corr_h -= gm.get(q, k, i) * tq,
                            TensorKind::AntiVector => corr_a += gm.get(i, k, q).conj() * tq,
                            TensorKind::AntiForm => corr_a -= gm.get(q, k, i).conj() * tq,
                        }
                    }
                    dh.values_mut()[p] += corr_h;
                    da.values_mut()[p] += corr_a;
                }
                holo.push(dh);
                anti.push(da);
            }
        }
        Ok(CovariantDerivative { holo, anti })
    }

    /// `max |∇_k g_{ij̄}|` with `∇_k g_{ij̄} = ∂_k g_{ij̄} − Γ^p_{ki} g_{pj̄}`.
    pub fn metric_parallel_residual(&self, g: &HermitianMetricField) -> Result<f64, GeomError> {
        let jets = self.jets(g.matrices())?;
        let n = self.chart().dim();
        let mut r: f64 = 0.0;
        for (index, j) in jets.iter().enumerate() {
            let gm = jet::christoffel(j).ok_or(GeomError::SingularMetric { index })?;
            for k in 0..n {
                for i in 0..n {
                    for jj in 0..n {
                        let mut v = j.dg[k].get(i, jj);
                        for p in 0..n {
                            v -= gm.get(p, k, i) * j.g.get(p, jj);
                        }
                        r = r.max(v.norm());
                    }
                }
            }
        }
        Ok(r)
    }

    /// `max |[∇_i, ∇_j̄] X^p − R_{ij̄k}^p X^k|`, with the commutator built from
    /// grid derivatives and `R` from the closed curvature formula.
    pub fn commutator_residual(&self, g: &HermitianMetricField, x: &[ComplexField]) -> Result<f64, GeomError> {
        let n = self.chart().dim();
        self.check_rank_one(x)?;
        let jets = self.jets(g.matrices())?;
        let len = self.chart().len();
        let mut gamma = Vec::with_capacity(len);
        let mut rup = Vec::with_capacity(len);
        for (index, j) in jets.iter().enumerate() {
            gamma.push(jet::christoffel(j).ok_or(GeomError::SingularMetric { index })?);
            let up = j.g.upper_inverse().ok_or(GeomError::SingularMetric { index })?;
            rup.push(jet::curvature(j).ok_or(GeomError::SingularMetric { index })?.raise_last(&up));
        }
        let xs: Vec<_> = x.iter().map(|c| self.diff.forward(c)).collect::<Result<_, _>>()?;
        // dbar_x[j * n + p] = ∂_j̄ X^p ; hol_x[i * n + p] = ∂_i X^p
        let mut dbar_x = Vec::with_capacity(n * n);
        let mut hol_x = Vec::with_capacity(n * n);
        for j in 0..n {
            for p in 0..n {
                dbar_x.push(self.diff.apply(&xs[p], Deriv::Anti(j))?);
                hol_x.push(self.diff.apply(&xs[p], Deriv::Holo(j))?);
            }
        }
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for p in 0..n {
                    // ∇_i(∇_j̄ X^p) = ∂_i ∂_j̄ X^p + Γ^p_{iq} ∂_j̄ X^q
                    let first = self.diff.diff(&dbar_x[j * n + p], Deriv::Holo(i))?;
                    // ∇_i X^p = ∂_i X^p + Γ^p_{ik} X^k, then ∂_j̄
                    let mut inner = hol_x[i * n + p].clone();
                    for (q, v) in inner.values_mut().iter_mut().enumerate() {
                        for k in 0..n {
                            *v += gamma[q].get(p, i, k) * x[k].values()[q];
                        }
                    }
                    let second = self.diff.diff(&inner, Deriv::Anti(j))?;
                    for q in 0..len {
                        let mut v = first.values()[q] - second.values()[q];
                        for k in 0..n {
                            v += gamma[q].get(p, i, k) * dbar_x[j * n + k].values()[q];
                            v -= rup[q].get(i, j, k, p) * x[k].values()[q];
                        }
                        r = r.max(v.norm());
                    }
                }
            }
        }
        Ok(r)
    }

    /// Same check for a (0,1)-form: `[∇_i, ∇_j̄] b_q̄ = conj(R_{jīq}^m) b_m̄`.
    pub fn commutator_residual_antiform(
        &self,
        g: &HermitianMetricField,
        b: &[ComplexField],
    ) -> Result<f64, GeomError> {
        let n = self.chart().dim();
        self.check_rank_one(b)?;
        let jets = self.jets(g.matrices())?;
        let len = self.chart().len();
        let mut gamma = Vec::with_capacity(len);
        let mut rup = Vec::with_capacity(len);
        for (index, j) in jets.iter().enumerate() {
            gamma.push(jet::christoffel(j).ok_or(GeomError::SingularMetric { index })?);
            let up = j.g.upper_inverse().ok_or(GeomError::SingularMetric { index })?;
            rup.push(jet::curvature(j).ok_or(GeomError::SingularMetric { index })?.raise_last(&up));
        }
        let bs: Vec<_> = b.iter().map(|c| self.diff.forward(c)).collect::<Result<_, _>>()?;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for q in 0..n {
                    // ∇_j̄ b_q̄ = ∂_j̄ b_q̄ − conj(Γ^m_{jq}) b_m̄, then ∂_i
                    let mut inner = self.diff.apply(&bs[q], Deriv::Anti(j))?;
                    for (pt, v) in inner.values_mut().iter_mut().enumerate() {
                        for m in 0..n {
                            *v -= gamma[pt].get(m, j, q).conj() * b[m].values()[pt];
                        }
                    }
                    let first = self.diff.diff(&inner, Deriv::Holo(i))?;
                    // ∇_j̄(∂_i b_q̄) = ∂_j̄ ∂_i b_q̄ − conj(Γ^m_{jq}) ∂_i b_m̄
                    let di_bq = self.diff.apply(&bs[q], Deriv::Holo(i))?;
                    let second_plain = self.diff.diff(&di_bq, Deriv::Anti(j))?;
                    let di_b: Vec<ComplexField> =
                        (0..n).map(|m| self.diff.apply(&bs[m], Deriv::Holo(i))).collect::<Result<_, _>>()?;
                    for pt in 0..len {
                        let mut second = second_plain.values()[pt];
                        let mut rhs = Complex64::new(0.0, 0.0);
                        for m in 0..n {
                            second -= gamma[pt].get(m, j, q).conj() * di_b[m].values()[pt];
                            rhs += rup[pt].get(j, i, q, m).conj() * b[m].values()[pt];
                        }
                        r = r.max((first.values()[pt] - second - rhs).norm());
                    }
                }
            }
        }
        Ok(r)
    }

    fn check_rank_one(&self, comps: &[ComplexField]) -> Result<(), GeomError> {
        let n = self.chart().dim();
        if comps.len() != n {
            return Err(GeomError::UnsupportedRank(format!("{} components, expected {n}", comps.len())));
        }
        for c in comps {
            self.chart().check(c.chart())?;
        }
        Ok(())
    }
}

/// `2ⁿ n!`: the factor between `ωⁿ` and `det g dx¹dy¹⋯dxⁿdyⁿ`.
pub fn volume_constant(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    2f64.powi(n as i32) * fact
}

/// Metric at a single point from a constant matrix, for convenience in tests.
pub fn constant_form(chart: GridChart, m: CMat) -> Result<OneOneFormField, GeomError> {
    OneOneFormField::real(MatrixField::constant(chart, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_volume_is_two() {
        let chart = GridChart::unit(1, 8).unwrap();
        let k = Kernel::spectral(chart);
        assert!((k.volume(&HermitianMetricField::flat(chart)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_metric_volume_n2() {
        let chart = GridChart::unit(2, 8).unwrap();
        let k = Kernel::spectral(chart);
        let a = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(2.0, 0.0),
            (0, 1) => Complex64::new(0.2, 0.1),
            (1, 0) => Complex64::new(0.2, -0.1),
            _ => Complex64::new(1.0, 0.0),
        });
        let g = HermitianMetricField::constant(chart, a).unwrap();
        assert!((k.volume(&g) - 8.0 * a.det().re).abs() < 1e-11);
        assert!(k.ricci(&g).unwrap().matrices().sup_abs() < 1e-14);
    }

    #[test]
    fn metric_from_cosine_potential() {
        let chart = GridChart::unit(1, 32).unwrap();
        let k = Kernel::spectral(chart);
        let g0 = HermitianMetricField::flat(chart);
        let phi = ScalarField::from_fn(chart, |x| 0.05 * (2.0 * PI * x[0]).cos());
        let g = k.metric_from_potential(&g0, &phi).unwrap();
        for p in 0..chart.len() {
            let x = chart.coords(p)[0];
            let expect = 1.0 - 0.05 * PI * PI * (2.0 * PI * x).cos();
            assert!((g.at(p).get(0, 0).re - expect).abs() < 1e-12);
        }
        assert!((g.min_eigenvalue() - (1.0 - 0.05 * PI * PI)).abs() < 1e-12);

        let bad = ScalarField::from_fn(chart, |x| 0.2 * (2.0 * PI * x[0]).cos());
        match k.metric_from_potential(&g0, &bad) {
            Err(GeomError::NotPositiveDefinite { min_eig, .. }) => assert!(min_eig < 0.0),
            other => panic!("expected positivity failure, got {other:?}"),
        }
    }

    #[test]
    fn flat_laplacian_and_gradient() {
        let chart = GridChart::unit(1, 16).unwrap();
        let k = Kernel::spectral(chart);
        let g = HermitianMetricField::flat(chart);
        let f = ScalarField::from_fn(chart, |x| (2.0 * PI * x[0]).cos());
        let lap = k.laplacian(&g, &f).unwrap();
        let s = ScalarField::from_fn(chart, |x| (2.0 * PI * x[0]).sin());
        let grad = k.grad_norm_sq(&g, &s).unwrap();
        for p in 0..chart.len() {
            let x = chart.coords(p)[0];
            assert!((lap.values()[p] + PI * PI * (2.0 * PI * x).cos()).abs() < 1e-11);
            assert!((grad.values()[p] - PI * PI * (2.0 * PI * x).cos().powi(2)).abs() < 1e-11);
        }
    }

    #[test]
    fn non_kahler_field_is_detected() {
        let chart = GridChart::unit(2, 16).unwrap();
        let k = Kernel::spectral(chart);
        let m = MatrixField::from_fn(chart, |x| {
            CMat::diag(&[1.0 + 0.5 * (2.0 * PI * x[2]).sin(), 1.0])
        })
        .unwrap();
        // ∂_2 g_{11̄} = ½·½·2π cos(2πx²): max π/2.
        let r = k.kahler_residual(&m).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-10, "{r}");
    }

    #[test]
    fn unsupported_rank_is_rejected() {
        let chart = GridChart::unit(1, 8).unwrap();
        let k = Kernel::spectral(chart);
        let g = HermitianMetricField::flat(chart);
        let t = TensorField { kind: TensorKind::Vector, comps: vec![ComplexField::zeros(chart); 3] };
        assert!(matches!(k.covariant_derivative(&g, &t), Err(GeomError::UnsupportedRank(_))));
    }
}
