//! Monge-Ampère reduction of the Kähler-Ricci flow on a flat torus.

use super::config::{FlowMode, InitialPotential, TorusFlowConfig};
use super::FlowError;
use crate::geom::kernel::volume_constant;
use crate::geom::{
    sample, CMat, GeomError, GridChart, HermitianMetricField, Kernel, MatrixField, OneOneFormField,
    ScalarField,
};
use rand::SeedableRng;
use std::f64::consts::PI;

/// Stability interval of classical RK4 on the negative real axis.
pub const RK4_REAL_STABILITY: f64 = 2.785;

/// Smooth positive volume form, as a density against `dx¹dy¹⋯`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    density: ScalarField,
    normalization: f64,
}

impl VolumeForm {
    pub fn density(&self) -> &ScalarField {
        &self.density
    }

    /// Constant `c` in `Ω = c e^F × (flat density)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn total(&self) -> f64 {
        self.density.integral()
    }
}

/// Builds `Ω` with `√−1∂∂̄ log Ω = χ` and `∫Ω = ∫ω₀ⁿ`.
///
/// On the torus `c₁ = 0`, so `χ` must be exact: its flat trace is solved for a
/// potential `F` with `Σ_i ∂_i∂_ī F = tr_flat χ`, and `∂∂̄F = χ` is then checked
/// entrywise.
pub fn build_volume_form(
    kernel: &Kernel,
    g0: &HermitianMetricField,
    chi: &OneOneFormField,
) -> Result<VolumeForm, FlowError> {
    let chart = *kernel.chart();
    let n = chart.dim();
    let scale = chi.matrices().sup_abs().max(1.0);
    let closed = kernel.closedness_residual(chi)?;
    if closed > 1e-8 * scale {
        return Err(FlowError::NotClosed(closed));
    }
    let herm = chi.matrices().hermitian_residual();
    if herm > 1e-12 * scale {
        return Err(FlowError::NotClosed(herm));
    }
    let tr = ScalarField::new(
        chart,
        (0..chart.len()).map(|p| (0..n).map(|i| chi.at(p).get(i, i).re).sum()).collect(),
    )?;
    if tr.mean().abs() > 1e-12 * scale {
        return Err(FlowError::NotExact(tr.mean()));
    }
    let f = kernel.differentiator().solve_flat_poisson(&tr)?;
    let recovered = kernel.ddbar(&f)?;
    let mismatch = recovered.matrices().sup_abs_diff(chi.matrices())?;
    if mismatch > 1e-8 * scale {
        return Err(FlowError::NotExact(mismatch));
    }
    let base = volume_constant(n);
    let raw = f.map(|v| base * v.exp());
    let target = kernel.volume(g0);
    let c = target / raw.integral();
    Ok(VolumeForm { density: raw.map(|v| c * v), normalization: c })
}

/// Accepted state of the flow.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub phi: ScalarField,
    /// `φ̇ = rhs(φ, t)`.
    pub phidot: ScalarField,
    /// Smallest eigenvalue of `ω(t)` over the grid.
    pub min_eig: f64,
}

/// The torus flow problem: reference path, volume form and right-hand side.
pub struct TorusFlow {
    config: TorusFlowConfig,
    kernel: Kernel,
    g0: HermitianMetricField,
    chi: MatrixField,
    omega: VolumeForm,
    /// `log Ω − log(2ⁿ n!)` per point.
    log_ratio: Vec<f64>,
    max_symbol: f64,
}

impl std::fmt::Debug for TorusFlow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusFlow").field("config", &self.config).finish()
    }
}

fn cosine_sum(chart: GridChart, amplitude: f64) -> ScalarField {
    let n = chart.dim();
    let l = chart.period();
    ScalarField::from_fn(chart, |x| (0..n).map(|i| amplitude * (2.0 * PI * x[2 * i] / l).cos()).sum())
}

impl TorusFlow {
    pub fn new(config: TorusFlowConfig) -> Result<Self, FlowError> {
        config.validate()?;
        let chart = GridChart::new(config.n, config.resolution, config.period)?;
        let kernel = Kernel::spectral(chart);
        let phi0 = match &config.initial {
            InitialPotential::Flat => ScalarField::zeros(chart),
            InitialPotential::Cosine { amplitude } => cosine_sum(chart, *amplitude),
            InitialPotential::Random { seed, strength, max_mode } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                sample::random_potential(&mut rng, kernel.differentiator(), *max_mode, *strength)?
            }
        };
        let g0 = kernel
            .metric_from_potential(&HermitianMetricField::flat(chart), &phi0)
            .map_err(|e| match e {
                GeomError::NotPositiveDefinite { .. } => {
                    FlowError::Config(format!("initial: potential is not admissible ({e})"))
                }
                other => other.into(),
            })?;
        let chi = kernel.ddbar(&cosine_sum(chart, config.chi_amplitude))?;
        Self::from_parts(config, kernel, g0, chi)
    }

    /// Engine for explicit initial metric and reference direction.
    pub fn from_parts(
        config: TorusFlowConfig,
        kernel: Kernel,
        g0: HermitianMetricField,
        chi: OneOneFormField,
    ) -> Result<Self, FlowError> {
        config.validate()?;
        kernel.chart().check(g0.chart())?;
        if config.mode == FlowMode::Normalized && chi.matrices().sup_abs() != 0.0 {
            return Err(FlowError::Config("chi_amplitude: only used in unnormalized mode".into()));
        }
        let omega = build_volume_form(&kernel, &g0, &chi)?;
        let log_ratio = omega.density.values().iter().map(|v| v.ln() - volume_constant(config.n).ln()).collect();
        let max_symbol = kernel.differentiator().max_flat_symbol();
        Ok(Self {
            chi: chi.matrices().clone(),
            config,
            kernel,
            g0,
            omega,
            log_ratio,
            max_symbol,
        })
    }

    pub fn config(&self) -> &TorusFlowConfig {
        &self.config
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn chart(&self) -> &GridChart {
        self.kernel.chart()
    }

    pub fn initial_metric(&self) -> &HermitianMetricField {
        &self.g0
    }

    pub fn volume_form(&self) -> &VolumeForm {
        &self.omega
    }

    pub fn mode(&self) -> FlowMode {
        self.config.mode
    }

    /// Reference metric `ω̂_t` at one point.
    #[inline]
    fn reference_at(&self, p: usize, t: f64) -> CMat {
        match self.config.mode {
            FlowMode::Unnormalized => *self.g0.at(p) + self.chi.at(p).scale(t),
            FlowMode::Normalized => self.g0.at(p).scale((-t).exp()),
        }
    }

    /// `ω̂_t` as a field (not checked for positivity).
    pub fn reference(&self, t: f64) -> MatrixField {
        let data = (0..self.chart().len()).map(|p| self.reference_at(p, t)).collect();
        MatrixField::new(*self.chart(), data).expect("reference field has chart shape")
    }

    /// `ω(t) = ω̂_t + √−1∂∂̄φ`.
    pub fn metric(&self, phi: &ScalarField, t: f64) -> Result<HermitianMetricField, FlowError> {
        let dd = self.kernel.ddbar(phi)?;
        Ok(HermitianMetricField::new(self.reference(t).add(dd.matrices())?)?)
    }

    /// `φ̇ = log(ωⁿ/Ω)`, minus `φ` in normalized mode. Also returns the smallest
    /// eigenvalue of `ω`.
    pub fn rhs(&self, phi: &ScalarField, t: f64) -> Result<(ScalarField, f64), FlowError> {
        let n = self.config.n;
        let dd = self.kernel.differentiator().ddbar(phi)?;
        let len = self.chart().len();
        let normalized = self.config.mode == FlowMode::Normalized;
        // ω̂_t = a·g0 + t·χ.
        let (a, b) = match self.config.mode {
            FlowMode::Unnormalized => (1.0, t),
            FlowMode::Normalized => ((-t).exp(), 0.0),
        };
        let g0 = self.g0.matrices().data();
        let chi = self.chi.data();
        let phi = phi.values();
        let mut out = Vec::with_capacity(len);
        let mut min_eig = f64::INFINITY;
        for p in 0..len {
            let (lam, tr, det) = if n == 1 {
                let g = a * g0[p].get(0, 0).re + b * chi[p].get(0, 0).re + dd[0].values()[p].re;
                (g, g, g)
            } else {
                let e = |i: usize, j: usize| a * g0[p].get(i, j) + b * chi[p].get(i, j) + dd[i * n + j].values()[p];
                let (g00, g11, g01) = (e(0, 0).re, e(1, 1).re, e(0, 1));
                let mean = 0.5 * (g00 + g11);
                let rad = (0.25 * (g00 - g11) * (g00 - g11) + g01.norm_sqr()).sqrt();
                (mean - rad, g00 + g11, g00 * g11 - g01.norm_sqr())
            };
            if !(lam > 1e-10 * tr && lam > 0.0) {
                return Err(GeomError::NotPositiveDefinite { index: p, min_eig: lam }.into());
            }
            min_eig = min_eig.min(lam);
            let mut v = det.ln() - self.log_ratio[p];
            if normalized {
                v -= phi[p];
            }
            out.push(v);
        }
        Ok((ScalarField::new(*self.chart(), out)?, min_eig))
    }

    /// Largest stable RK4 step for a metric with smallest eigenvalue `min_eig`.
    pub fn stability_limit(&self, min_eig: f64) -> f64 {
        let damping = if self.config.mode == FlowMode::Normalized { 1.0 } else { 0.0 };
        self.config.dt.safety * RK4_REAL_STABILITY / (self.max_symbol / min_eig + damping)
    }

    pub fn initial_state(&self) -> Result<FlowState, FlowError> {
        let phi = ScalarField::zeros(*self.chart());
        let (phidot, min_eig) = self.rhs(&phi, 0.0)?;
        Ok(FlowState { t: 0.0, phi, phidot, min_eig })
    }

    /// One classical RK4 step. Rejects steps above the stability limit and
    /// steps whose stages leave the positive cone.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState, FlowError> {
        let limit = self.stability_limit(state.min_eig);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(FlowError::StiffnessRejection { dt, limit });
        }
        let t = state.t;
        let phi = state.phi.values();
        let axpy = |k: &ScalarField, h: f64| -> Result<ScalarField, FlowError> {
            let v = phi.iter().zip(k.values()).map(|(a, b)| a + h * b).collect();
            Ok(ScalarField::new(*self.chart(), v)?)
        };
        let k1 = &state.phidot;
        let (k2, _) = self.rhs(&axpy(k1, 0.5 * dt)?, t + 0.5 * dt)?;
        let (k3, _) = self.rhs(&axpy(&k2, 0.5 * dt)?, t + 0.5 * dt)?;
        let (k4, _) = self.rhs(&axpy(&k3, dt)?, t + dt)?;
        let next: Vec<f64> = (0..phi.len())
            .map(|p| {
                phi[p]
                    + dt / 6.0
                        * (k1.values()[p] + 2.0 * k2.values()[p] + 2.0 * k3.values()[p] + k4.values()[p])
            })
            .collect();
        let phi = ScalarField::new(*self.chart(), next)?;
        let (phidot, min_eig) = self.rhs(&phi, t + dt)?;
        Ok(FlowState { t: t + dt, phi, phidot, min_eig })
    }
}
