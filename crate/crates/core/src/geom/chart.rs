//! Periodic torus charts and the fields that live on them.

use super::linalg::CMat;
use super::GeomError;
use num_complex::Complex64;

/// Uniform periodic grid on `[0, period)^{2n}`.
///
/// Real axes are paired as `(x^i, y^i) = (axis 2i, axis 2i+1)` (zero-based), so
/// `z^1 = x^1 + i y^1` uses axes 0 and 1. Storage is row-major with axis 0
/// varying slowest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridChart {
    n: usize,
    resolution: usize,
    period: f64,
}

impl GridChart {
    pub fn new(n: usize, resolution: usize, period: f64) -> Result<Self, GeomError> {
        if !(1..=2).contains(&n) {
            return Err(GeomError::InvalidChart(format!("complex dimension {n} not in {{1,2}}")));
        }
        if resolution < 8 || resolution % 2 != 0 {
            return Err(GeomError::InvalidChart(format!(
                "resolution {resolution} must be even and at least 8"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(GeomError::InvalidChart(format!("period {period} must be positive")));
        }
        Ok(Self { n, resolution, period })
    }

    pub fn unit(n: usize, resolution: usize) -> Result<Self, GeomError> {
        Self::new(n, resolution, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> usize {
        2 * self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.axes() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Real coordinate volume of the fundamental domain.
    pub fn domain_volume(&self) -> f64 {
        self.period.powi(self.axes() as i32)
    }

    /// Flat index stride of a real axis.
    pub fn stride(&self, axis: usize) -> usize {
        self.resolution.pow((self.axes() - 1 - axis) as u32)
    }

    /// Integer grid position along each real axis.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for a in (0..self.axes()).rev() {
            out[a] = idx % self.resolution;
            idx /= self.resolution;
        }
        out
    }

    /// Real coordinates of a grid point.
    pub fn coords(&self, idx: usize) -> [f64; 4] {
        let m = self.multi_index(idx);
        let h = self.spacing();
        let mut out = [0.0; 4];
        for a in 0..self.axes() {
            out[a] = m[a] as f64 * h;
        }
        out
    }

    /// Complex coordinates `z^i = x^i + i y^i` of a grid point.
    pub fn complex_coords(&self, idx: usize) -> [Complex64; 2] {
        let x = self.coords(idx);
        let mut z = [Complex64::new(0.0, 0.0); 2];
        for i in 0..self.n {
            z[i] = Complex64::new(x[2 * i], x[2 * i + 1]);
        }
        z
    }

    pub(crate) fn check(&self, other: &GridChart) -> Result<(), GeomError> {
        if self == other {
            Ok(())
        } else {
            Err(GeomError::ChartMismatch)
        }
    }
}

/// Real scalar on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    chart: GridChart,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(chart: GridChart, values: Vec<f64>) -> Result<Self, GeomError> {
        if values.len() != chart.len() {
            return Err(GeomError::ShapeMismatch { expected: chart.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite(i));
        }
        Ok(Self { chart, values })
    }

    pub fn zeros(chart: GridChart) -> Self {
        Self { chart, values: vec![0.0; chart.len()] }
    }

    pub fn constant(chart: GridChart, c: f64) -> Self {
        Self { chart, values: vec![c; chart.len()] }
    }

    /// Samples `f(x)` at every grid point, `x` being the real coordinates.
    pub fn from_fn(chart: GridChart, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..chart.len()).map(|i| f(&chart.coords(i)[..chart.axes()])).collect();
        Self { chart, values }
    }

    pub(crate) fn from_vec_unchecked(chart: GridChart, values: Vec<f64>) -> Self {
        Self { chart, values }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    /// `∫ f dx` over the fundamental domain (rectangle rule, spectrally exact).
    pub fn integral(&self) -> f64 {
        self.mean() * self.chart.domain_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { chart: self.chart, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self, GeomError> {
        self.chart.check(&other.chart)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { chart: self.chart, values })
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField::from_vec_unchecked(
            self.chart,
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

/// Complex scalar on a chart: a single tensor component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    chart: GridChart,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(chart: GridChart, values: Vec<Complex64>) -> Result<Self, GeomError> {
        if values.len() != chart.len() {
            return Err(GeomError::ShapeMismatch { expected: chart.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite(i));
        }
        Ok(Self { chart, values })
    }

    pub fn zeros(chart: GridChart) -> Self {
        Self { chart, values: vec![Complex64::new(0.0, 0.0); chart.len()] }
    }

    pub fn from_fn(chart: GridChart, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..chart.len()).map(|i| f(&chart.coords(i)[..chart.axes()])).collect();
        Self { chart, values }
    }

    pub(crate) fn from_vec_unchecked(chart: GridChart, values: Vec<Complex64>) -> Self {
        Self { chart, values }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_part(&self) -> ScalarField {
        ScalarField::from_vec_unchecked(self.chart, self.values.iter().map(|v| v.re).collect())
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn sup_abs_diff(&self, other: &ComplexField) -> Result<f64, GeomError> {
        self.chart.check(&other.chart)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }
}

/// Per-point `n × n` complex matrices, the common storage of metric and
/// (1,1)-form fields.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    chart: GridChart,
    data: Vec<CMat>,
}

impl MatrixField {
    pub fn new(chart: GridChart, data: Vec<CMat>) -> Result<Self, GeomError> {
        if data.len() != chart.len() {
            return Err(GeomError::ShapeMismatch { expected: chart.len(), found: data.len() });
        }
        if let Some(m) = data.iter().find(|m| m.dim() != chart.dim()) {
            return Err(GeomError::InvalidTensor(format!(
                "{}x{} matrix on a chart of dimension {}",
                m.dim(),
                m.dim(),
                chart.dim()
            )));
        }
        Ok(Self { chart, data })
    }

    pub fn constant(chart: GridChart, m: CMat) -> Result<Self, GeomError> {
        Self::new(chart, vec![m; chart.len()])
    }

    pub fn from_fn(chart: GridChart, f: impl Fn(&[f64]) -> CMat) -> Result<Self, GeomError> {
        let data = (0..chart.len()).map(|i| f(&chart.coords(i)[..chart.axes()])).collect();
        Self::new(chart, data)
    }

    /// Assembles from component fields indexed `[i * n + j]`.
    pub fn from_components(chart: GridChart, comps: &[ComplexField]) -> Result<Self, GeomError> {
        let n = chart.dim();
        if comps.len() != n * n {
            return Err(GeomError::InvalidTensor(format!("expected {} components", n * n)));
        }
        for c in comps {
            chart.check(c.chart())?;
        }
        let data = (0..chart.len())
            .map(|p| CMat::from_fn(n, |i, j| comps[i * n + j].values()[p]))
            .collect();
        Ok(Self { chart, data })
    }

    pub(crate) fn from_vec_unchecked(chart: GridChart, data: Vec<CMat>) -> Self {
        Self { chart, data }
    }

    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    pub fn at(&self, p: usize) -> &CMat {
        &self.data[p]
    }

    pub fn data(&self) -> &[CMat] {
        &self.data
    }

    pub fn component(&self, i: usize, j: usize) -> ComplexField {
        ComplexField::from_vec_unchecked(self.chart, self.data.iter().map(|m| m.get(i, j)).collect())
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.hermitian_residual()))
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.max_abs()))
    }

    pub fn sup_abs_diff(&self, other: &MatrixField) -> Result<f64, GeomError> {
        self.chart.check(&other.chart)?;
        Ok(self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((*a - *b).max_abs())))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { chart: self.chart, data: self.data.iter().map(|m| m.scale(s)).collect() }
    }

    pub fn add(&self, other: &MatrixField) -> Result<Self, GeomError> {
        self.chart.check(&other.chart)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect();
        Ok(Self { chart: self.chart, data })
    }

    pub fn sub(&self, other: &MatrixField) -> Result<Self, GeomError> {
        self.chart.check(&other.chart)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect();
        Ok(Self { chart: self.chart, data })
    }

    /// Pointwise mean of every entry.
    pub fn mean(&self) -> CMat {
        let n = self.chart.dim();
        let inv = 1.0 / self.data.len() as f64;
        let mut acc = CMat::zeros(n);
        for m in &self.data {
            acc = acc + *m;
        }
        acc.scale(inv)
    }
}

/// A real or complex (1,1)-form `β_{ij̄}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneOneFormField {
    inner: MatrixField,
    real: bool,
}

/// Hermitian residual allowed for fields flagged real.
pub const HERMITIAN_TOL: f64 = 1e-12;

impl OneOneFormField {
    /// Complex (not necessarily Hermitian) form.
    pub fn complex(inner: MatrixField) -> Self {
        Self { inner, real: false }
    }

    /// Real form; checks Hermitian symmetry relative to the field size.
    pub fn real(inner: MatrixField) -> Result<Self, GeomError> {
        let scale = inner.sup_abs().max(1.0);
        let r = inner.hermitian_residual();
        if r > HERMITIAN_TOL * scale {
            return Err(GeomError::NotHermitian(r));
        }
        Ok(Self { inner, real: true })
    }

    pub(crate) fn real_unchecked(inner: MatrixField) -> Self {
        Self { inner, real: true }
    }

    pub fn zeros(chart: GridChart) -> Self {
        Self { inner: MatrixField::from_vec_unchecked(chart, vec![CMat::zeros(chart.dim()); chart.len()]), real: true }
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn matrices(&self) -> &MatrixField {
        &self.inner
    }

    pub fn chart(&self) -> &GridChart {
        self.inner.chart()
    }

    pub fn at(&self, p: usize) -> &CMat {
        self.inner.at(p)
    }
}

/// Kähler (or merely Hermitian) metric `g_{ij̄}`, positive definite at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMetricField {
    inner: MatrixField,
}

impl HermitianMetricField {
    /// Validates Hermitian symmetry and positive definiteness.
    pub fn new(inner: MatrixField) -> Result<Self, GeomError> {
        let scale = inner.sup_abs().max(1.0);
        let r = inner.hermitian_residual();
        if r > HERMITIAN_TOL * scale {
            return Err(GeomError::NotHermitian(r));
        }
        check_positive(&inner)?;
        Ok(Self { inner })
    }

    pub fn flat(chart: GridChart) -> Self {
        let id = CMat::identity(chart.dim());
        Self { inner: MatrixField::from_vec_unchecked(chart, vec![id; chart.len()]) }
    }

    pub fn constant(chart: GridChart, a: CMat) -> Result<Self, GeomError> {
        Self::new(MatrixField::constant(chart, a)?)
    }

    pub fn chart(&self) -> &GridChart {
        self.inner.chart()
    }

    pub fn dim(&self) -> usize {
        self.inner.chart().dim()
    }

    pub fn at(&self, p: usize) -> &CMat {
        self.inner.at(p)
    }

    pub fn matrices(&self) -> &MatrixField {
        &self.inner
    }

    pub fn as_form(&self) -> OneOneFormField {
        OneOneFormField::real_unchecked(self.inner.clone())
    }

    pub fn scale(&self, s: f64) -> Result<Self, GeomError> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(GeomError::InvalidTensor(format!("metric scale {s} must be positive")));
        }
        Ok(Self { inner: self.inner.scale(s) })
    }

    /// Smallest eigenvalue over the grid.
    pub fn min_eigenvalue(&self) -> f64 {
        self.inner.data().iter().fold(f64::INFINITY, |m, a| m.min(a.min_eigenvalue()))
    }
}

fn check_positive(m: &MatrixField) -> Result<(), GeomError> {
    for (index, a) in m.data().iter().enumerate() {
        if !a.is_positive_definite() {
            return Err(GeomError::NotPositiveDefinite { index, min_eig: a.min_eigenvalue() });
        }
    }
    Ok(())
}
