//! Fits of exponential decay envelopes to monitored quantities.

use super::series::MonitorSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayModel {
    /// `C (t + 1) e^{−t}`.
    LinearTimesExp,
    /// `C e^{−t/2}`.
    HalfExp,
}

impl DecayModel {
    pub fn shape(&self, t: f64) -> f64 {
        match self {
            DecayModel::LinearTimesExp => (t + 1.0) * (-t).exp(),
            DecayModel::HalfExp => (-0.5 * t).exp(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    SupPhidot,
    SupAbsPhi,
    OscPhi,
}

impl Quantity {
    fn read(&self, r: &super::MonitorRecord) -> f64 {
        match self {
            Quantity::SupPhidot => r.sup_phidot,
            Quantity::SupAbsPhi => r.sup_abs_phi,
            Quantity::OscPhi => r.osc_phi,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Least-squares constant over the fit window.
    pub c: f64,
    /// Smallest constant for which the envelope holds at every sample.
    pub c_envelope: f64,
    /// RMS residual of `log q − log(C·shape)` over the fit window.
    pub residual: f64,
    /// Whether `q ≤ c · shape` at every usable sample.
    pub bound_holds: bool,
    /// False when `q / shape` grows along the window, so no constant works.
    pub applicable: bool,
    /// Samples dropped for being non-positive.
    pub skipped: usize,
}

/// Slope of `log(q/shape)` per unit time above which the model is rejected.
const GROWTH_TOL: f64 = 1e-3;

/// Fits `log q = log C + log shape(t)` over the last 80% of the samples.
pub fn fit_decay(times: &[f64], values: &[f64], model: DecayModel) -> Option<DecayFit> {
    let mut skipped = 0;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter_map(|(&t, &q)| {
            if q > 0.0 && q.is_finite() {
                Some((t, q.ln() - model.shape(t).ln()))
            } else {
                skipped += 1;
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let window = &pts[pts.len() - (pts.len() * 4).div_ceil(5).max(2)..];
    let k = window.len() as f64;
    let log_c = window.iter().map(|p| p.1).sum::<f64>() / k;
    let residual = (window.iter().map(|p| (p.1 - log_c).powi(2)).sum::<f64>() / k).sqrt();
    let t_mean = window.iter().map(|p| p.0).sum::<f64>() / k;
    let stt: f64 = window.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    let slope = if stt > 0.0 {
        window.iter().map(|p| (p.0 - t_mean) * (p.1 - log_c)).sum::<f64>() / stt
    } else {
        0.0
    };
    let c = log_c.exp();
    let c_envelope = pts.iter().map(|p| p.1.exp()).fold(0.0, f64::max);
    let bound_holds = pts.iter().all(|p| p.1 <= log_c + 1e-9);
    Some(DecayFit { c, c_envelope, residual, bound_holds, applicable: slope <= GROWTH_TOL, skipped })
}

pub fn fit_series(series: &MonitorSeries, quantity: Quantity, model: DecayModel) -> Option<DecayFit> {
    let times = series.times();
    let values: Vec<f64> = series.records.iter().map(|r| quantity.read(r)).collect();
    fit_decay(&times, &values, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_recovers_constant() {
        let t: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let q: Vec<f64> = t.iter().map(|t| 3.0 * (t + 1.0) * (-t).exp()).collect();
        let f = fit_decay(&t, &q, DecayModel::LinearTimesExp).unwrap();
        assert!((f.c - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-10);
        assert!(f.bound_holds && f.applicable);
    }

    #[test]
    fn constant_series_is_not_applicable() {
        let t: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let q = vec![1.0; 50];
        for m in [DecayModel::LinearTimesExp, DecayModel::HalfExp] {
            assert!(!fit_decay(&t, &q, m).unwrap().applicable);
        }
    }

    #[test]
    fn non_positive_samples_are_skipped() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let q = [0.0, (-0.5_f64).exp(), -1.0, (-1.5_f64).exp()];
        let f = fit_decay(&t, &q, DecayModel::HalfExp).unwrap();
        assert_eq!(f.skipped, 2);
        assert!((f.c - 1.0).abs() < 1e-12);
    }
}
