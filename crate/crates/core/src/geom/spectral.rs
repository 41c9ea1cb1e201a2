//! Differentiation on periodic charts.
//!
//! Both schemes are translation invariant, so both are applied as Fourier
//! multipliers: the trigonometric scheme uses `i k` (Nyquist mode dropped), the
//! fourth-order scheme uses the symbols of the central stencils
//! `(f₋₂ − 8f₋₁ + 8f₁ − f₂)/12h` and `(−f₋₂ + 16f₋₁ − 30f₀ + 16f₁ − f₂)/12h²`.

use super::chart::{ComplexField, GridChart, ScalarField};
use super::GeomError;
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    Spectral,
    FourthOrder,
}

impl Scheme {
    /// Formal order of accuracy; `None` for the trigonometric scheme.
    pub fn order(&self) -> Option<u32> {
        match self {
            Scheme::Spectral => None,
            Scheme::FourthOrder => Some(4),
        }
    }
}

/// A first-order complex derivative `∂_i` or `∂_ī` (zero-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deriv {
    Holo(usize),
    Anti(usize),
}

/// Fourier coefficients of a field, ready for repeated differentiation.
#[derive(Clone)]
pub struct Spectrum {
    chart: GridChart,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }
}

pub struct Differentiator {
    chart: GridChart,
    scheme: Scheme,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    /// Symbol of `d/dx` per 1-D wave index.
    first: Vec<Complex64>,
    /// Symbol of `d²/dx²` per 1-D wave index.
    second: Vec<f64>,
    /// Symbols of `∂_i∂_ī` over the half-spectrum layout, one table per `i`.
    half_diag: Vec<Vec<f64>>,
}

impl fmt::Debug for Differentiator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Differentiator").field("chart", &self.chart).field("scheme", &self.scheme).finish()
    }
}

impl Differentiator {
    pub fn new(chart: GridChart, scheme: Scheme) -> Self {
        let n = chart.resolution();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut real_planner = RealFftPlanner::new();
        let r2c = real_planner.plan_fft_forward(n);
        let c2r = real_planner.plan_fft_inverse(n);
        let h = chart.spacing();
        let (first, second) = (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                let k = 2.0 * PI * signed / chart.period();
                match scheme {
                    Scheme::Spectral => {
                        let d = if m == n / 2 { 0.0 } else { k };
                        (Complex64::new(0.0, d), -d * d)
                    }
                    Scheme::FourthOrder => {
                        let th = k * h;
                        let d = (8.0 * th.sin() - (2.0 * th).sin()) / (6.0 * h);
                        let s = -(30.0 - 32.0 * th.cos() + 2.0 * (2.0 * th).cos()) / (12.0 * h * h);
                        (Complex64::new(0.0, d), s)
                    }
                }
            })
            .unzip();
        let mut d = Self { chart, scheme, fwd, inv, r2c, c2r, first, second, half_diag: Vec::new() };
        d.half_diag = (0..chart.dim())
            .map(|i| d.half_layout().into_iter().map(|m| d.mixed_symbol(i, i, &m).re).collect())
            .collect();
        d
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn forward(&self, f: &ComplexField) -> Result<Spectrum, GeomError> {
        self.chart.check(f.chart())?;
        let mut coeffs = f.values().to_vec();
        self.transform(&mut coeffs, &self.fwd);
        Ok(Spectrum { chart: self.chart, coeffs })
    }

    pub fn forward_real(&self, f: &ScalarField) -> Result<Spectrum, GeomError> {
        self.chart.check(f.chart())?;
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut coeffs, &self.fwd);
        Ok(Spectrum { chart: self.chart, coeffs })
    }

    /// Multiplies by a symbol and transforms back.
    fn synthesize(&self, s: &Spectrum, symbol: impl Fn(&[usize; 4]) -> Complex64) -> ComplexField {
        let axes = self.chart.axes();
        let n = self.chart.resolution();
        let scale = 1.0 / self.chart.len() as f64;
        let mut out = Vec::with_capacity(s.coeffs.len());
        let mut m = [0usize; 4];
        for c in &s.coeffs {
            out.push(c * symbol(&m) * scale);
            // Row-major odometer over the multi-index.
            for a in (0..axes).rev() {
                m[a] += 1;
                if m[a] < n {
                    break;
                }
                m[a] = 0;
            }
        }
        self.transform(&mut out, &self.inv);
        ComplexField::from_vec_unchecked(self.chart, out)
    }

    #[inline]
    fn holo_symbol(&self, i: usize, m: &[usize; 4]) -> Complex64 {
        0.5 * (self.first[m[2 * i]] - Complex64::i() * self.first[m[2 * i + 1]])
    }

    #[inline]
    fn anti_symbol(&self, i: usize, m: &[usize; 4]) -> Complex64 {
        0.5 * (self.first[m[2 * i]] + Complex64::i() * self.first[m[2 * i + 1]])
    }

    #[inline]
    fn mixed_symbol(&self, i: usize, j: usize, m: &[usize; 4]) -> Complex64 {
        if i == j {
            Complex64::new(0.25 * (self.second[m[2 * i]] + self.second[m[2 * i + 1]]), 0.0)
        } else {
            self.holo_symbol(i, m) * self.anti_symbol(j, m)
        }
    }

    fn check_index(&self, i: usize) -> Result<(), GeomError> {
        if i < self.chart.dim() {
            Ok(())
        } else {
            Err(GeomError::InvalidTensor(format!("index {i} out of range for n = {}", self.chart.dim())))
        }
    }

    pub fn apply(&self, s: &Spectrum, d: Deriv) -> Result<ComplexField, GeomError> {
        self.chart.check(s.chart())?;
        match d {
            Deriv::Holo(i) => {
                self.check_index(i)?;
                Ok(self.synthesize(s, |m| self.holo_symbol(i, m)))
            }
            Deriv::Anti(i) => {
                self.check_index(i)?;
                Ok(self.synthesize(s, |m| self.anti_symbol(i, m)))
            }
        }
    }

    /// `∂_i ∂_j̄` applied in one pass.
    pub fn apply_mixed(&self, s: &Spectrum, i: usize, j: usize) -> Result<ComplexField, GeomError> {
        self.chart.check(s.chart())?;
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.synthesize(s, |m| self.mixed_symbol(i, j, m)))
    }

    pub fn diff(&self, f: &ComplexField, d: Deriv) -> Result<ComplexField, GeomError> {
        self.apply(&self.forward(f)?, d)
    }

    pub fn diff_real(&self, f: &ScalarField, d: Deriv) -> Result<ComplexField, GeomError> {
        self.apply(&self.forward_real(f)?, d)
    }

    /// All `∂_i∂_j̄ f` for real `f`, component `[i * n + j]`.
    ///
    /// `∂_j∂_ī f = conj(∂_i∂_j̄ f)` and the diagonal is real; both hold exactly.
    pub fn ddbar(&self, f: &ScalarField) -> Result<Vec<ComplexField>, GeomError> {
        self.chart.check(f.chart())?;
        let half = self.forward_half(f);
        let n = self.chart.dim();
        let mut out: Vec<Option<ComplexField>> = vec![None; n * n];
        for i in 0..n {
            let diag = self.scale_half(&half, |p| self.half_diag[i][p]);
            out[i * n + i] = Some(ComplexField::from_vec_unchecked(
                self.chart,
                diag.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            ));
            for j in i + 1..n {
                // Split into the real and imaginary parts of the output, each of
                // which has a Hermitian-symmetric symbol.
                let neg = |m: &[usize; 4]| {
                    let r = self.chart.resolution();
                    let mut k = [0; 4];
                    for a in 0..4 {
                        k[a] = (r - m[a]) % r;
                    }
                    k
                };
                let re = self.synthesize_half(&half, |m| {
                    0.5 * (self.mixed_symbol(i, j, m) + self.mixed_symbol(i, j, &neg(m)).conj())
                });
                let im = self.synthesize_half(&half, |m| {
                    let d = self.mixed_symbol(i, j, m) - self.mixed_symbol(i, j, &neg(m)).conj();
                    Complex64::new(0.5 * d.im, -0.5 * d.re)
                });
                let upper: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
                let lower = upper.iter().map(|v| v.conj()).collect();
                out[i * n + j] = Some(ComplexField::from_vec_unchecked(self.chart, upper));
                out[j * n + i] = Some(ComplexField::from_vec_unchecked(self.chart, lower));
            }
        }
        Ok(out.into_iter().map(|c| c.expect("every component is filled")).collect())
    }

    /// Largest magnitude of the symbol of the flat `Σ_i ∂_i∂_ī`.
    pub fn max_flat_symbol(&self) -> f64 {
        let peak = self.second.iter().fold(0.0_f64, |a, s| a.max(s.abs()));
        0.5 * self.chart.dim() as f64 * peak
    }

    /// Flat `Σ_i ∂_i∂_ī f`, a quarter of the Euclidean Laplacian.
    pub fn flat_laplacian(&self, f: &ScalarField) -> Result<ScalarField, GeomError> {
        self.chart.check(f.chart())?;
        let half = self.forward_half(f);
        let n = self.chart.dim();
        let v = self.scale_half(&half, |p| (0..n).map(|i| self.half_diag[i][p]).sum());
        Ok(ScalarField::from_vec_unchecked(self.chart, v))
    }

    /// Solves `Σ_i ∂_i∂_ī u = f` with `u` of zero mean. `f` must have zero mean.
    pub fn solve_flat_poisson(&self, f: &ScalarField) -> Result<ScalarField, GeomError> {
        let scale = f.sup_abs().max(1.0);
        if f.mean().abs() > 1e-12 * scale {
            return Err(GeomError::InvalidTensor(format!(
                "Poisson source has nonzero mean {:e}",
                f.mean()
            )));
        }
        self.chart.check(f.chart())?;
        let half = self.forward_half(f);
        let n = self.chart.dim();
        let v = self.synthesize_half(&half, |m| {
            let sym: Complex64 = (0..n).map(|i| self.mixed_symbol(i, i, m)).sum();
            if sym.norm() < 1e-14 {
                Complex64::new(0.0, 0.0)
            } else {
                1.0 / sym
            }
        });
        Ok(ScalarField::from_vec_unchecked(self.chart, v))
    }

    /// Coefficients of a real field; the last axis keeps only the `N/2 + 1`
    /// non-negative frequencies.
    fn forward_half(&self, f: &ScalarField) -> Vec<Complex64> {
        let n = self.chart.resolution();
        let h = n / 2 + 1;
        let rows = self.chart.len() / n;
        let mut out = vec![Complex64::new(0.0, 0.0); rows * h];
        let mut row = vec![0.0; n];
        let mut scratch = self.r2c.make_scratch_vec();
        for (r, dst) in out.chunks_exact_mut(h).enumerate() {
            row.copy_from_slice(&f.values()[r * n..(r + 1) * n]);
            self.r2c.process_with_scratch(&mut row, dst, &mut scratch).expect("buffer lengths match the plan");
        }
        self.transform_outer(&mut out, &self.fwd, h);
        out
    }

    /// Multi-indices of the half-spectrum layout, in storage order.
    fn half_layout(&self) -> Vec<[usize; 4]> {
        let axes = self.chart.axes();
        let n = self.chart.resolution();
        let h = n / 2 + 1;
        let count = self.chart.len() / n * h;
        let mut out = Vec::with_capacity(count);
        let mut m = [0usize; 4];
        for _ in 0..count {
            out.push(m);
            for a in (0..axes).rev() {
                m[a] += 1;
                if m[a] < if a == axes - 1 { h } else { n } {
                    break;
                }
                m[a] = 0;
            }
        }
        out
    }

    /// Real field with coefficients `c · symbol`; the symbol must satisfy
    /// `symbol(−m) = conj(symbol(m))`.
    fn synthesize_half(&self, coeffs: &[Complex64], symbol: impl Fn(&[usize; 4]) -> Complex64) -> Vec<f64> {
        let scale = 1.0 / self.chart.len() as f64;
        let spec = coeffs.iter().zip(self.half_layout()).map(|(c, m)| c * symbol(&m) * scale).collect();
        self.inverse_half(spec)
    }

    /// As [`Self::synthesize_half`] for a real symbol given per storage index.
    fn scale_half(&self, coeffs: &[Complex64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let scale = 1.0 / self.chart.len() as f64;
        let spec = coeffs.iter().enumerate().map(|(p, c)| c * (symbol(p) * scale)).collect();
        self.inverse_half(spec)
    }

    fn inverse_half(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        let n = self.chart.resolution();
        let h = n / 2 + 1;
        self.transform_outer(&mut spec, &self.inv, h);
        let mut out = vec![0.0; self.chart.len()];
        let mut scratch = self.c2r.make_scratch_vec();
        for (src, dst) in spec.chunks_exact_mut(h).zip(out.chunks_exact_mut(n)) {
            // Zero-frequency and Nyquist bins of a real row are real; drop roundoff.
            src[0].im = 0.0;
            src[h - 1].im = 0.0;
            self.c2r.process_with_scratch(src, dst, &mut scratch).expect("buffer lengths match the plan");
        }
        out
    }

    /// In-place N-dimensional FFT, one real axis at a time.
    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Last axis is contiguous.
        plan.process_with_scratch(data, &mut scratch);
        self.transform_outer(data, plan, self.chart.resolution());
    }

    /// FFT along every axis but the last, whose stored width is `width`.
    fn transform_outer(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>, width: usize) {
        let n = self.chart.resolution();
        let axes = self.chart.axes();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let total = data.len();
        // Gather a few neighbouring lines at a time so reads stay in short
        // contiguous runs and the buffer stays small.
        const BATCH: usize = 16;
        let mut line = vec![Complex64::new(0.0, 0.0); BATCH * n];
        for axis in 0..axes - 1 {
            let stride = n.pow((axes - 2 - axis) as u32) * width;
            let block = stride * n;
            for outer in (0..total).step_by(block) {
                for inner0 in (0..stride).step_by(BATCH) {
                    let batch = BATCH.min(stride - inner0);
                    for k in 0..n {
                        let src = outer + inner0 + k * stride;
                        for (b, v) in data[src..src + batch].iter().enumerate() {
                            line[b * n + k] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut line[..batch * n], &mut scratch);
                    for k in 0..n {
                        let dst = outer + inner0 + k * stride;
                        for (b, v) in data[dst..dst + batch].iter_mut().enumerate() {
                            *v = line[b * n + k];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_field(chart: GridChart) -> ScalarField {
        ScalarField::from_fn(chart, |x| (2.0 * PI * x[0]).cos())
    }

    #[test]
    fn ddbar_of_cosine() {
        let chart = GridChart::unit(1, 16).unwrap();
        let d = Differentiator::new(chart, Scheme::Spectral);
        let f = cos_field(chart);
        let dd = d.ddbar(&f).unwrap();
        for p in 0..chart.len() {
            let expect = -PI * PI * f.values()[p];
            assert!((dd[0].values()[p].re - expect).abs() < 1e-11);
            assert!(dd[0].values()[p].im.abs() < 1e-12);
        }
    }

    #[test]
    fn holomorphic_derivative_of_plane_wave() {
        // f = sin(2π y): ∂_z f = -i/2 · 2π cos(2π y).
        let chart = GridChart::unit(1, 16).unwrap();
        let d = Differentiator::new(chart, Scheme::Spectral);
        let f = ScalarField::from_fn(chart, |x| (2.0 * PI * x[1]).sin());
        let g = d.diff_real(&f, Deriv::Holo(0)).unwrap();
        let gb = d.diff_real(&f, Deriv::Anti(0)).unwrap();
        for p in 0..chart.len() {
            let y = chart.coords(p)[1];
            let expect = Complex64::new(0.0, -PI * (2.0 * PI * y).cos());
            assert!((g.values()[p] - expect).norm() < 1e-11);
            assert!((gb.values()[p] - expect.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let chart = GridChart::unit(2, 8).unwrap();
        let d = Differentiator::new(chart, Scheme::FourthOrder);
        let f = ScalarField::constant(chart, 3.5);
        for dv in [Deriv::Holo(0), Deriv::Holo(1), Deriv::Anti(0), Deriv::Anti(1)] {
            assert!(d.diff_real(&f, dv).unwrap().sup_abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_matches_stencil() {
        let chart = GridChart::unit(1, 16).unwrap();
        let d = Differentiator::new(chart, Scheme::FourthOrder);
        let f = ScalarField::from_fn(chart, |x| (2.0 * PI * x[0]).sin() + 0.3 * (4.0 * PI * x[1]).cos());
        let fx = d.diff_real(&f, Deriv::Holo(0)).unwrap();
        let dd = d.ddbar(&f).unwrap();
        let h = chart.spacing();
        let n = 16;
        let at = |i: usize, j: usize| f.values()[(i % n) * n + (j % n)];
        for i in 0..n {
            for j in 0..n {
                let dx = (at(i + n - 2, j) - 8.0 * at(i + n - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j)) / (12.0 * h);
                let dy = (at(i, j + n - 2) - 8.0 * at(i, j + n - 1) + 8.0 * at(i, j + 1) - at(i, j + 2)) / (12.0 * h);
                let expect = 0.5 * Complex64::new(dx, -dy);
                assert!((fx.values()[i * n + j] - expect).norm() < 1e-10);
                let second = |a: f64, b: f64, c: f64, d: f64, e: f64| (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
                let fxx = second(at(i + n - 2, j), at(i + n - 1, j), at(i, j), at(i + 1, j), at(i + 2, j));
                let fyy = second(at(i, j + n - 2), at(i, j + n - 1), at(i, j), at(i, j + 1), at(i, j + 2));
                assert!((dd[0].values()[i * n + j].re - 0.25 * (fxx + fyy)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn poisson_inverts_laplacian() {
        let chart = GridChart::unit(2, 8).unwrap();
        let d = Differentiator::new(chart, Scheme::Spectral);
        let u = ScalarField::from_fn(chart, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[3]).sin());
        let f = d.flat_laplacian(&u).unwrap();
        let back = d.solve_flat_poisson(&f).unwrap();
        let err = back.zip_map(&u, |a, b| a - b).unwrap().sup_abs();
        assert!(err < 1e-12, "{err}");
    }
}
