//! Run configuration for the torus flow.

use super::FlowError;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMode {
    /// `∂_t ω = −Ric(ω)`.
    #[default]
    Unnormalized,
    /// `∂_t ω = −Ric(ω) − ω`.
    Normalized,
}

/// Potential `φ₀` of the initial metric `ω₀ = ω_flat + √−1∂∂̄φ₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialPotential {
    Flat,
    /// `ε Σ_i cos(2π x^i / L)`, one term per complex coordinate.
    Cosine { amplitude: f64 },
    /// Seeded random trigonometric potential with `∂∂̄φ₀` eigenvalues in
    /// `[−strength, strength]`.
    Random { seed: u64, strength: f64, max_mode: i32 },
}

impl Default for InitialPotential {
    fn default() -> Self {
        InitialPotential::Cosine { amplitude: 0.05 }
    }
}

/// Time-step policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DtPolicy {
    /// Upper bound on the step; the stability limit usually binds first.
    pub initial: f64,
    /// Fraction of the explicit stability limit actually used.
    pub safety: f64,
    /// Halvings allowed after a rejected step before declaring a singular time.
    pub max_halvings: u32,
    /// Step-doubling error tolerance (sup norm of `φ`).
    pub error_tol: f64,
    /// Accepted steps between step-doubling error checks.
    pub error_check_every: usize,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self { initial: 1e-2, safety: 0.9, max_halvings: 12, error_tol: 1e-9, error_check_every: 500 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusFlowConfig {
    pub mode: FlowMode,
    /// Complex dimension, 1 or 2.
    pub n: usize,
    /// Grid points per real axis.
    pub resolution: usize,
    pub period: f64,
    pub initial: InitialPotential,
    /// Amplitude `a` of the reference direction `χ = √−1∂∂̄(a Σ_i cos(2π x^i/L))`
    /// in `ω̂_t = ω₀ + tχ` (unnormalized mode only).
    pub chi_amplitude: f64,
    pub dt: DtPolicy,
    pub t_max: f64,
    /// Stop once `sup |Ric| <` this value.
    pub ricci_tol: f64,
    /// Time between monitor samples.
    pub monitor_every: f64,
    /// Constant `A` of the trace monitor `log tr_{ω0} ω − Aφ`.
    pub trace_a: f64,
    /// Finite horizon `S` enabling the `(S − t + ε)φ̇ + φ + nt` monitor.
    pub horizon: Option<f64>,
    /// `ε` of that monitor.
    pub horizon_epsilon: f64,
    /// Times at which the potential is kept in the run output.
    pub sample_times: Vec<f64>,
}

impl Default for TorusFlowConfig {
    fn default() -> Self {
        Self {
            mode: FlowMode::Unnormalized,
            n: 1,
            resolution: 64,
            period: 1.0,
            initial: InitialPotential::default(),
            chi_amplitude: 0.0,
            dt: DtPolicy::default(),
            t_max: 5.0,
            ricci_tol: 1e-6,
            monitor_every: 0.005,
            trace_a: 1.0,
            horizon: None,
            horizon_epsilon: 0.1,
            sample_times: Vec::new(),
        }
    }
}

impl TorusFlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |key: &str, why: &str| Err(FlowError::Config(format!("{key}: {why}")));
        if !(1..=2).contains(&self.n) {
            return bad("n", "must be 1 or 2");
        }
        if self.resolution < 8 || self.resolution % 2 != 0 {
            return bad("resolution", "must be even and at least 8");
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad("period", "must be positive");
        }
        if !(self.dt.initial > 0.0 && self.dt.initial.is_finite()) {
            return bad("dt.initial", "must be positive");
        }
        if !(self.dt.safety > 0.0 && self.dt.safety <= 1.0) {
            return bad("dt.safety", "must be in (0, 1]");
        }
        if !(self.dt.error_tol > 0.0) {
            return bad("dt.error_tol", "must be positive");
        }
        if self.dt.error_check_every == 0 {
            return bad("dt.error_check_every", "must be at least 1");
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad("t_max", "must be positive");
        }
        if !(self.ricci_tol > 0.0) {
            return bad("ricci_tol", "must be positive");
        }
        if !(self.monitor_every > 0.0) {
            return bad("monitor_every", "must be positive");
        }
        if !self.trace_a.is_finite() {
            return bad("trace_a", "must be finite");
        }
        if let Some(s) = self.horizon {
            if !(s > 0.0) {
                return bad("horizon", "must be positive");
            }
        }
        if !(self.horizon_epsilon > 0.0) {
            return bad("horizon_epsilon", "must be positive");
        }
        if self.sample_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("sample_times", "must be non-negative");
        }
        if self.mode == FlowMode::Normalized && self.chi_amplitude != 0.0 {
            return bad("chi_amplitude", "only used in unnormalized mode");
        }
        match &self.initial {
            InitialPotential::Cosine { amplitude } if !amplitude.is_finite() => {
                return bad("initial.amplitude", "must be finite")
            }
            InitialPotential::Random { strength, max_mode, .. } => {
                if !(*strength >= 0.0 && *strength < 1.0) {
                    return bad("initial.strength", "must be in [0, 1)");
                }
                if *max_mode < 1 || 2 * *max_mode as usize >= self.resolution / 2 {
                    return bad("initial.max_mode", "must be at least 1 and well below Nyquist");
                }
            }
            _ => {}
        }
        Ok(())
    }
}
