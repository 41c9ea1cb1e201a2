//! Driver loop: step-size control, positivity-guarded halving, monitors.

use super::config::{FlowMode, TorusFlowConfig};
use super::engine::{FlowState, TorusFlow};
use super::FlowError;
use crate::diagnostics::{MonitorRecord, MonitorSeries};
use crate::geom::{GeomError, HermitianMetricField, MatrixField, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome {
    /// `sup |Ric| < ricci_tol` at a monitor time.
    Converged { t: f64 },
    TmaxReached { t: f64 },
    /// Positivity could not be restored by halving; last accepted `t` plus half
    /// the final rejected step.
    Singular { t_est: f64 },
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Converged { .. } => 0,
            Outcome::TmaxReached { .. } => 2,
            Outcome::Singular { .. } => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::TmaxReached { .. } => "t_max",
            Outcome::Singular { .. } => "singular",
        }
    }
}

/// Potential and metric kept at a requested sample time.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub phi: ScalarField,
    pub metric: HermitianMetricField,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub mode: FlowMode,
    pub series: MonitorSeries,
    pub samples: Vec<Sample>,
    pub initial_metric: HermitianMetricField,
    pub final_state: FlowState,
    pub final_metric: HermitianMetricField,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest step-doubling error estimate seen.
    pub max_step_error: f64,
}

impl RunOutput {
    /// `φ − mean φ`; the potential is only defined up to a constant.
    pub fn gauged_potential(&self) -> ScalarField {
        let m = self.final_state.phi.mean();
        self.final_state.phi.map(|v| v - m)
    }

    /// Entrywise sup distance of the final metric from a constant matrix.
    pub fn deviation_from(&self, target: &MatrixField) -> Result<f64, FlowError> {
        Ok(self.final_metric.matrices().sup_abs_diff(target)?)
    }

    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.max(1.0))
    }
}

pub fn run(config: &TorusFlowConfig) -> Result<RunOutput, FlowError> {
    let flow = TorusFlow::new(config.clone())?;
    run_engine(&flow, |_, _| {})
}

/// Monitor record at `state`; failures of the time-derivative residuals leave
/// them as NaN.
fn monitor(flow: &TorusFlow, state: &FlowState, dt: f64) -> Result<MonitorRecord, FlowError> {
    let cfg = flow.config();
    let kernel = flow.kernel();
    let n = cfg.n as f64;
    let t = state.t;
    let g = flow.metric(&state.phi, t)?;
    let ricci = kernel.ricci(&g)?;
    let dens = kernel.volume_density(&g);
    let phidot = &state.phidot;
    let phi = &state.phi;
    let p = phidot.zip_map(&dens, |a, b| a * b)?.integral();
    let grad = kernel.grad_norm_sq(&g, phidot)?;
    let dpdt_formula = -grad.zip_map(&dens, |a, b| a * b)?.integral();
    let tr = kernel.trace(flow.initial_metric(), &g.as_form())?;
    let trace_monitor = tr.zip_map(phi, |a, b| a.ln() - cfg.trace_a * b)?.max();
    let omega = flow.volume_form();
    let jensen_integral = phi.zip_map(omega.density(), |a, b| a * b)?.integral() / omega.total();
    let horizon_min = cfg.horizon.map(|s| {
        let c = s - t + cfg.horizon_epsilon;
        phidot.zip_map(phi, |a, b| c * a + b + n * t).map(|f| f.min()).unwrap_or(f64::NAN)
    });
    // Well inside the stability limit, so the stiffest resolved modes are
    // differenced accurately too.
    let delta = dt.min(flow.stability_limit(state.min_eig)) / 8.0;
    let (geometric_residual, heat_residual) =
        time_residuals(flow, state, &g, delta).unwrap_or((f64::NAN, f64::NAN));
    Ok(MonitorRecord {
        t,
        dt,
        total_volume: dens.integral(),
        osc_phi: phi.oscillation(),
        sup_phidot: phidot.sup_abs(),
        p,
        dpdt_measured: f64::NAN,
        dpdt_formula,
        ricci_residual: ricci.matrices().sup_abs(),
        min_eig: state.min_eig,
        trace_monitor,
        jensen_integral,
        sup_abs_phi: phi.sup_abs(),
        horizon_min,
        geometric_residual,
        heat_residual,
    })
}

/// Centred residuals of `∂_t ω = −Ric − [ω]` and of the evolution of `φ̇` over
/// two half steps of total length `delta`.
fn time_residuals(
    flow: &TorusFlow,
    state: &FlowState,
    g_a: &HermitianMetricField,
    delta: f64,
) -> Result<(f64, f64), FlowError> {
    let kernel = flow.kernel();
    let mid = flow.step(state, 0.5 * delta)?;
    let end = flow.step(&mid, 0.5 * delta)?;
    let g_m = flow.metric(&mid.phi, mid.t)?;
    let g_b = flow.metric(&end.phi, end.t)?;
    let normalized = flow.mode() == FlowMode::Normalized;

    let mut expected = kernel.ricci(&g_m)?.matrices().scale(-1.0);
    if normalized {
        expected = expected.sub(g_m.matrices())?;
    }
    let measured = g_b.matrices().sub(g_a.matrices())?.scale(1.0 / delta);
    let geometric = measured.sub(&expected)?.sup_abs();

    // ∂_t φ̇ = Δφ̇ + tr_ω(∂_t ω̂), minus φ̇ in normalized mode.
    let lap = kernel.laplacian(&g_m, &mid.phidot)?;
    let ref_rate = match flow.mode() {
        FlowMode::Unnormalized => flow.reference(1.0).sub(&flow.reference(0.0))?,
        FlowMode::Normalized => flow.reference(mid.t).scale(-1.0),
    };
    let src = kernel.trace(&g_m, &crate::geom::OneOneFormField::real(ref_rate)?)?;
    let mut heat_rhs = lap.zip_map(&src, |a, b| a + b)?;
    if normalized {
        heat_rhs = heat_rhs.zip_map(&mid.phidot, |a, b| a - b)?;
    }
    let rate = end.phidot.zip_map(&state.phidot, |b, a| (b - a) / delta)?;
    let heat = rate.zip_map(&heat_rhs, |a, b| a - b)?.sup_abs();
    Ok((geometric, heat))
}

fn is_retryable(e: &FlowError) -> bool {
    matches!(
        e,
        FlowError::StiffnessRejection { .. } | FlowError::Geom(GeomError::NotPositiveDefinite { .. })
    )
}

/// Runs the flow, calling `observer` at every monitor time.
pub fn run_engine(
    flow: &TorusFlow,
    mut observer: impl FnMut(&MonitorRecord, &FlowState),
) -> Result<RunOutput, FlowError> {
    let cfg = flow.config();
    let policy = &cfg.dt;
    let mut sample_times: Vec<f64> = cfg.sample_times.iter().copied().filter(|t| *t <= cfg.t_max).collect();
    sample_times.sort_by(f64::total_cmp);
    sample_times.dedup();
    let last_sample = sample_times.last().copied().unwrap_or(0.0);

    let mut state = flow.initial_state()?;
    let mut series = MonitorSeries::new(cfg.n);
    let mut samples = Vec::new();
    let mut next_sample = 0;
    let mut monitor_index: u64 = 1;
    let mut dt_cap = policy.initial;
    let mut dt_last = dt_cap.min(flow.stability_limit(state.min_eig));
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut since_check = 0usize;
    let mut max_step_error = 0.0_f64;

    let take_sample = |state: &FlowState| -> Result<Sample, FlowError> {
        Ok(Sample { t: state.t, phi: state.phi.clone(), metric: flow.metric(&state.phi, state.t)? })
    };
    while next_sample < sample_times.len() && sample_times[next_sample] <= 0.0 {
        samples.push(take_sample(&state)?);
        next_sample += 1;
    }
    let first = monitor(flow, &state, dt_last)?;
    observer(&first, &state);
    let mut converged = first.ricci_residual < cfg.ricci_tol && last_sample <= 0.0;
    series.records.push(first);

    let outcome = loop {
        if converged {
            break Outcome::Converged { t: state.t };
        }
        if state.t >= cfg.t_max {
            break Outcome::TmaxReached { t: state.t };
        }
        let monitor_t = (monitor_index as f64 * cfg.monitor_every).min(cfg.t_max);
        let target = match sample_times.get(next_sample) {
            Some(&s) if s < monitor_t => s,
            _ => monitor_t,
        };
        let mut dt = dt_cap.min(flow.stability_limit(state.min_eig));
        let mut landing = target - state.t <= dt * (1.0 + 1e-9);
        if landing {
            dt = target - state.t;
        }
        let mut halvings = 0;
        let accepted = loop {
            match flow.step(&state, dt) {
                Ok(s) => break Some(s),
                Err(e) if is_retryable(&e) => {
                    rejected += 1;
                    if halvings == policy.max_halvings {
                        break None;
                    }
                    halvings += 1;
                    dt *= 0.5;
                    landing = false;
                }
                Err(e) => return Err(e),
            }
        };
        let Some(mut next) = accepted else {
            break Outcome::Singular { t_est: state.t + 0.5 * dt };
        };
        since_check += 1;
        if since_check >= policy.error_check_every {
            since_check = 0;
            let halves = flow.step(&state, 0.5 * dt).and_then(|m| flow.step(&m, 0.5 * dt));
            if let Ok(h) = halves {
                let err = next.phi.zip_map(&h.phi, |a, b| a - b)?.sup_abs() / 15.0;
                max_step_error = max_step_error.max(err);
                if err > policy.error_tol {
                    dt_cap = 0.5 * dt;
                    next = h;
                }
            }
        }
        if landing {
            next.t = target;
        }
        series.max_step_phidot_increase =
            series.max_step_phidot_increase.max(next.phidot.sup_abs() - state.phidot.sup_abs());
        steps += 1;
        dt_last = dt;
        state = next;

        while next_sample < sample_times.len() && sample_times[next_sample] <= state.t {
            samples.push(take_sample(&state)?);
            next_sample += 1;
        }
        if state.t >= monitor_t {
            monitor_index += 1;
            let rec = monitor(flow, &state, dt_last)?;
            observer(&rec, &state);
            converged = rec.ricci_residual < cfg.ricci_tol && state.t >= last_sample;
            series.records.push(rec);
        }
    };
    series.fill_measured_dpdt();
    let final_metric = flow.metric(&state.phi, state.t)?;
    Ok(RunOutput {
        outcome,
        mode: cfg.mode,
        series,
        samples,
        initial_metric: flow.initial_metric().clone(),
        final_state: state,
        final_metric,
        steps,
        rejected_steps: rejected,
        max_step_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::InitialPotential;

    fn cfg(amplitude: f64, t_max: f64) -> TorusFlowConfig {
        TorusFlowConfig {
            resolution: 16,
            initial: InitialPotential::Cosine { amplitude },
            t_max,
            monitor_every: 0.01,
            ..Default::default()
        }
    }

    #[test]
    fn flat_run_converges_immediately() {
        let out = run(&cfg(0.0, 1.0)).unwrap();
        assert_eq!(out.outcome, Outcome::Converged { t: 0.0 });
        assert_eq!(out.series.len(), 1);
    }

    #[test]
    fn cosine_run_damps_phidot() {
        let out = run(&cfg(0.05, 0.05)).unwrap();
        assert!(matches!(out.outcome, Outcome::TmaxReached { .. }));
        let r = &out.series.records;
        assert!(r.last().unwrap().sup_phidot < r[0].sup_phidot);
        assert!((r.last().unwrap().t - 0.05).abs() < 1e-15);
        assert_eq!(r.len(), 6);
        assert!(r[1].geometric_residual < 1e-4, "{}", r[1].geometric_residual);
        assert!(r[1].heat_residual < 1e-4, "{}", r[1].heat_residual);
    }

    #[test]
    fn samples_land_on_requested_times() {
        let mut c = cfg(0.05, 0.03);
        c.sample_times = vec![0.0, 0.0123, 0.03];
        let out = run(&c).unwrap();
        assert_eq!(out.samples.len(), 3);
        assert_eq!(out.samples[1].t, 0.0123);
    }
}
