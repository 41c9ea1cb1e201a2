//! Time series of monitored scalars along a torus flow run.

use super::DiagnosticsError;
use std::io::Write;

/// CSV header of [`MonitorSeries::write_csv`].
pub const MONITOR_COLUMNS: [&str; 12] = [
    "t",
    "dt",
    "total_volume",
    "osc_phi",
    "sup_phidot",
    "P",
    "dPdt_measured",
    "dPdt_formula",
    "ricci_residual",
    "min_eig",
    "trace_monitor",
    "jensen_integral",
];

/// One monitor sample.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    /// Step size in use when the sample was taken.
    pub dt: f64,
    pub total_volume: f64,
    pub osc_phi: f64,
    pub sup_phidot: f64,
    /// `∫ φ̇ ωⁿ`.
    pub p: f64,
    /// Finite difference of `P` over neighbouring samples; filled after the run.
    pub dpdt_measured: f64,
    /// `−∫ |∂φ̇|²_g ωⁿ`.
    pub dpdt_formula: f64,
    /// `sup |Ric(ω)|` over entries.
    pub ricci_residual: f64,
    pub min_eig: f64,
    /// `max (log tr_{ω0} ω − A φ)`.
    pub trace_monitor: f64,
    /// `(1/V) ∫ φ Ω`.
    pub jensen_integral: f64,
    pub sup_abs_phi: f64,
    /// `min ((S − t + ε) φ̇ + φ + n t)`; only with a finite horizon `S`.
    pub horizon_min: Option<f64>,
    /// `sup |(g(t+δ) − g(t))/δ + Ric(ω(t+δ/2))|` over one monitor step.
    pub geometric_residual: f64,
    /// `sup |∂_t φ̇ − Δφ̇|`, the heat-equation residual of `φ̇`.
    pub heat_residual: f64,
}

impl MonitorRecord {
    fn row(&self) -> [f64; 12] {
        [
            self.t,
            self.dt,
            self.total_volume,
            self.osc_phi,
            self.sup_phidot,
            self.p,
            self.dpdt_measured,
            self.dpdt_formula,
            self.ricci_residual,
            self.min_eig,
            self.trace_monitor,
            self.jensen_integral,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonitorSeries {
    pub records: Vec<MonitorRecord>,
    /// Complex dimension of the run.
    pub n: usize,
    /// Largest increase of `sup |φ̇|` between consecutive accepted steps.
    pub max_step_phidot_increase: f64,
}

impl MonitorSeries {
    pub fn new(n: usize) -> Self {
        Self { records: Vec::new(), n, max_step_phidot_increase: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Fills `dpdt_measured` by differentiating the quadratic through each
    /// sample and its neighbours (one-sided at the ends).
    pub fn fill_measured_dpdt(&mut self) {
        let t: Vec<f64> = self.records.iter().map(|r| r.t).collect();
        let p: Vec<f64> = self.records.iter().map(|r| r.p).collect();
        for (r, v) in self.records.iter_mut().zip(lagrange_derivative(&t, &p)) {
            r.dpdt_measured = v;
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DiagnosticsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MONITOR_COLUMNS)?;
        for r in &self.records {
            w.write_record(r.row().iter().map(|v| format_float(*v)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Derivative of the quadratic through each sample and its neighbours
/// (one-sided at the ends, a secant for two samples).
pub fn lagrange_derivative(t: &[f64], p: &[f64]) -> Vec<f64> {
    let m = t.len();
    if m < 2 {
        return vec![0.0; m];
    }
    (0..m)
        .map(|i| {
            if m == 2 {
                return (p[1] - p[0]) / (t[1] - t[0]);
            }
            let a = i.saturating_sub(1).min(m - 3);
            let (b, c) = (a + 1, a + 2);
            let x = t[i];
            p[a] * (2.0 * x - t[b] - t[c]) / ((t[a] - t[b]) * (t[a] - t[c]))
                + p[b] * (2.0 * x - t[a] - t[c]) / ((t[b] - t[a]) * (t[b] - t[c]))
                + p[c] * (2.0 * x - t[a] - t[b]) / ((t[c] - t[a]) * (t[c] - t[b]))
        })
        .collect()
}

/// Shortest round-trip formatting, so equal values always print identically.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_derivative_of_quadratic() {
        let mut s = MonitorSeries::new(1);
        for i in 0..5 {
            let t = i as f64 * 0.1;
            s.records.push(MonitorRecord { t, p: t * t, ..Default::default() });
        }
        s.fill_measured_dpdt();
        for r in &s.records {
            assert!((r.dpdt_measured - 2.0 * r.t).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_twelve_columns() {
        let mut s = MonitorSeries::new(1);
        s.records.push(MonitorRecord { t: 0.5, ..Default::default() });
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 12);
        assert!(header.starts_with("t,dt,total_volume"));
    }
}
