//! Change of variables between the normalized and unnormalized flows.

use super::config::FlowMode;
use super::run::RunOutput;
use super::FlowError;

/// Largest sup-norm deviation between `ω̃(s)/(s+1)` from the unnormalized run
/// and `ω(t)` from the normalized run, over `s = e^t − 1` for each `t`.
///
/// Both runs must start from the same metric and keep samples at the
/// corresponding times.
pub fn rescaling_correspondence(
    unnormalized: &RunOutput,
    normalized: &RunOutput,
    times: &[f64],
) -> Result<f64, FlowError> {
    if unnormalized.mode != FlowMode::Unnormalized || normalized.mode != FlowMode::Normalized {
        return Err(FlowError::Incompatible("expected one unnormalized and one normalized run".into()));
    }
    let start = unnormalized.initial_metric.matrices().sup_abs_diff(normalized.initial_metric.matrices())?;
    if start != 0.0 {
        return Err(FlowError::Incompatible(format!("initial metrics differ by {start:e}")));
    }
    let mut worst = 0.0_f64;
    for &t in times {
        let s = t.exp_m1();
        let a = unnormalized
            .sample_at(s)
            .ok_or_else(|| FlowError::Incompatible(format!("unnormalized run has no sample at s = {s}")))?;
        let b = normalized
            .sample_at(t)
            .ok_or_else(|| FlowError::Incompatible(format!("normalized run has no sample at t = {t}")))?;
        let d = a.metric.matrices().scale(1.0 / (s + 1.0)).sup_abs_diff(b.metric.matrices())?;
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, InitialPotential, TorusFlowConfig};

    fn pair(amplitude: f64) -> (RunOutput, RunOutput) {
        let times = [0.0, 0.1];
        let base = TorusFlowConfig {
            resolution: 16,
            initial: InitialPotential::Cosine { amplitude },
            ricci_tol: 1e-30,
            monitor_every: 0.05,
            ..Default::default()
        };
        let un = TorusFlowConfig {
            t_max: 0.1_f64.exp_m1(),
            sample_times: times.iter().map(|t: &f64| t.exp_m1()).collect(),
            ..base.clone()
        };
        let no = TorusFlowConfig { mode: FlowMode::Normalized, t_max: 0.1, sample_times: times.to_vec(), ..base };
        (run(&un).unwrap(), run(&no).unwrap())
    }

    #[test]
    fn flat_data_corresponds_exactly() {
        let (a, b) = pair(0.0);
        assert!(rescaling_correspondence(&a, &b, &[0.0, 0.1]).unwrap() < 1e-12);
    }

    #[test]
    fn perturbed_data_corresponds() {
        let (a, b) = pair(0.05);
        assert_eq!(rescaling_correspondence(&a, &b, &[0.0]).unwrap(), 0.0);
        let d = rescaling_correspondence(&a, &b, &[0.1]).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn mismatched_modes_rejected() {
        let (a, b) = pair(0.0);
        assert!(matches!(rescaling_correspondence(&b, &a, &[0.0]), Err(FlowError::Incompatible(_))));
    }
}
