//! Post-hoc audits of a monitor series against the bounds the flow should obey.

use super::series::{format_float, MonitorSeries};
use super::DiagnosticsError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    /// Allowed increase between consecutive samples of quantities that should
    /// not increase.
    pub monotone_slack: f64,
    /// Allowed relative growth of the `sup |φ|` bound over the second half of
    /// the run.
    pub phi_bound_growth: f64,
    /// Allowed excess of the trace monitor over its initial value.
    pub trace_margin: f64,
    /// Allowed relative drift of the total volume.
    pub volume_tol: f64,
    /// Relative tolerance of the `dP/dt` identity.
    pub p_identity_rel_tol: f64,
    /// The identity is only checked where `|dP/dt|` exceeds this.
    pub p_identity_floor: f64,
    /// Multiplier applied to `−∫|∂φ̇|²ωⁿ` before comparing with the measured
    /// derivative.
    pub p_identity_factor: f64,
    /// Bound on `|dP/dt|` at the last sample of a converged run.
    pub final_dpdt_tol: f64,
    /// Bound on the geometric and heat-equation residuals.
    pub residual_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            monotone_slack: 1e-10,
            phi_bound_growth: 1e-2,
            trace_margin: 1.0,
            volume_tol: 1e-8,
            p_identity_rel_tol: 0.05,
            p_identity_floor: 1e-8,
            p_identity_factor: 1.0,
            final_dpdt_tol: 1e-8,
            residual_tol: 1e-3,
        }
    }
}

/// Outcome of one audit.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub satisfied: bool,
    /// Largest amount by which the bound is exceeded (0 when satisfied).
    pub max_violation: f64,
    /// Record index and time of the largest violation.
    pub location: Option<(usize, f64)>,
    /// Smallest constant realizing the bound, where one is meaningful.
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimateReport {
    pub verdicts: Vec<Verdict>,
}

impl EstimateReport {
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_satisfied(&self) -> bool {
        self.verdicts.iter().all(|v| v.satisfied)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DiagnosticsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["monitor", "satisfied", "max_violation", "record", "t", "constant"])?;
        for v in &self.verdicts {
            let (rec, t) = match v.location {
                Some((i, t)) => (i.to_string(), format_float(t)),
                None => (String::new(), String::new()),
            };
            w.write_record([
                v.name.to_string(),
                v.satisfied.to_string(),
                format_float(v.max_violation),
                rec,
                t,
                v.constant.map(format_float).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let status = if v.satisfied { "ok  " } else { "FAIL" };
            let _ = write!(s, "{status} {:<28}", v.name);
            if let Some(c) = v.constant {
                let _ = write!(s, " constant {c:.6e}");
            }
            if !v.satisfied {
                let _ = write!(s, " violation {:.3e}", v.max_violation);
                if let Some((i, t)) = v.location {
                    let _ = write!(s, " at record {i} (t = {t})");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Tracks the worst excess of a family of checks.
struct Worst {
    excess: f64,
    location: Option<(usize, f64)>,
}

impl Worst {
    fn new() -> Self {
        Self { excess: 0.0, location: None }
    }

    fn see(&mut self, excess: f64, i: usize, t: f64) {
        // NaN counts as a violation.
        if excess > self.excess || (excess.is_nan() && !self.excess.is_nan()) {
            self.excess = excess;
            self.location = Some((i, t));
        }
    }

    fn verdict(self, name: &'static str, constant: Option<f64>) -> Verdict {
        let satisfied = self.location.is_none();
        Verdict {
            name,
            satisfied,
            max_violation: if satisfied { 0.0 } else { self.excess },
            location: self.location,
            constant,
        }
    }
}

fn non_increasing(name: &'static str, series: &MonitorSeries, slack: f64, f: impl Fn(usize) -> f64) -> Verdict {
    let mut w = Worst::new();
    for i in 1..series.len() {
        let rise = f(i) - f(i - 1);
        if !(rise <= slack) {
            w.see(rise, i, series.records[i].t);
        }
    }
    w.verdict(name, None)
}

pub fn audit_bounds(series: &MonitorSeries, cfg: &AuditConfig) -> Result<EstimateReport, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let r = &series.records;
    let m = r.len();
    let mut verdicts = Vec::new();

    // sup |φ| ≤ C, with C not growing over the second half of the run.
    let c_all = r.iter().map(|x| x.sup_abs_phi).fold(0.0, f64::max);
    let half = m / 2;
    let c_first = r[..=half].iter().map(|x| x.sup_abs_phi).fold(0.0, f64::max);
    let mut w = Worst::new();
    for (i, x) in r.iter().enumerate().skip(half + 1) {
        let excess = x.sup_abs_phi - c_first;
        if !(excess <= cfg.phi_bound_growth * c_first + cfg.monotone_slack) {
            w.see(excess, i, x.t);
        }
    }
    verdicts.push(w.verdict("phi_bound", Some(c_all)));

    // Minimum of (S − t + ε)φ̇ + φ + nt is attained at t = 0.
    if let Some(start) = r[0].horizon_min {
        let mut w = Worst::new();
        for (i, x) in r.iter().enumerate() {
            let v = x.horizon_min.unwrap_or(f64::NAN);
            let drop = start - v;
            if !(drop <= cfg.monotone_slack) {
                w.see(drop, i, x.t);
            }
        }
        let lowest = r.iter().filter_map(|x| x.horizon_min).fold(f64::INFINITY, f64::min);
        verdicts.push(w.verdict("horizon_min_at_start", Some(lowest)));
    }

    let mut w = Worst::new();
    let trace_max = r.iter().map(|x| x.trace_monitor).fold(f64::NEG_INFINITY, f64::max);
    for (i, x) in r.iter().enumerate() {
        let excess = x.trace_monitor - r[0].trace_monitor;
        if !(excess <= cfg.trace_margin) {
            w.see(excess, i, x.t);
        }
    }
    verdicts.push(w.verdict("trace_bound", Some(trace_max)));

    let mut v = non_increasing("sup_phidot_nonincreasing", series, cfg.monotone_slack, |i| r[i].sup_phidot);
    if series.max_step_phidot_increase > cfg.monotone_slack && v.satisfied {
        v.satisfied = false;
        v.max_violation = series.max_step_phidot_increase;
    }
    v.constant = Some(series.max_step_phidot_increase);
    verdicts.push(v);
    verdicts.push(non_increasing("p_nonincreasing", series, cfg.monotone_slack, |i| r[i].p));
    verdicts.push(non_increasing("jensen_nonincreasing", series, cfg.monotone_slack, |i| r[i].jensen_integral));

    // Finite-difference dP/dt against the integral formula.
    let mut w = Worst::new();
    let mut worst_rel = 0.0_f64;
    for (i, x) in r.iter().enumerate() {
        if x.dpdt_measured.abs() <= cfg.p_identity_floor {
            continue;
        }
        let rel = (x.dpdt_measured - cfg.p_identity_factor * x.dpdt_formula).abs() / x.dpdt_measured.abs();
        worst_rel = worst_rel.max(rel);
        if !(rel <= cfg.p_identity_rel_tol) {
            w.see(rel, i, x.t);
        }
    }
    verdicts.push(w.verdict("p_identity", Some(worst_rel)));

    let last = &r[m - 1];
    let mut w = Worst::new();
    if !(last.dpdt_formula.abs() <= cfg.final_dpdt_tol) {
        w.see(last.dpdt_formula.abs(), m - 1, last.t);
    }
    verdicts.push(w.verdict("dpdt_vanishes", Some(last.dpdt_formula.abs())));

    // Empirical ratio (d²P/dt²)/(dP/dt); only sign problems are flagged.
    let mut w = Worst::new();
    let mut ratio = 0.0_f64;
    for i in 1..m.saturating_sub(1) {
        let (a, b) = (&r[i - 1], &r[i + 1]);
        let d2 = (b.dpdt_measured - a.dpdt_measured) / (b.t - a.t);
        let d1 = r[i].dpdt_measured;
        if d1 > cfg.monotone_slack {
            w.see(d1, i, r[i].t);
        }
        if d1.abs() > cfg.p_identity_floor {
            ratio = ratio.max(d2 / d1);
        }
    }
    verdicts.push(w.verdict("dpdt_sign", Some(ratio)));

    let v0 = r[0].total_volume;
    let mut w = Worst::new();
    let mut drift = 0.0_f64;
    for (i, x) in r.iter().enumerate() {
        let rel = (x.total_volume - v0).abs() / v0.abs();
        drift = drift.max(rel);
        if !(rel <= cfg.volume_tol) {
            w.see(rel, i, x.t);
        }
    }
    verdicts.push(w.verdict("volume_drift", Some(drift)));

    for (name, get) in [
        ("geometric_residual", (|x: &super::MonitorRecord| x.geometric_residual) as fn(&_) -> f64),
        ("heat_residual", |x| x.heat_residual),
    ] {
        let mut w = Worst::new();
        let worst = r.iter().map(get).fold(0.0, f64::max);
        for (i, x) in r.iter().enumerate() {
            if !(get(x) <= cfg.residual_tol) {
                w.see(get(x), i, x.t);
            }
        }
        verdicts.push(w.verdict(name, Some(worst)));
    }
    Ok(EstimateReport { verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::MonitorRecord;

    fn flat_series() -> MonitorSeries {
        let mut s = MonitorSeries::new(1);
        for i in 0..10 {
            s.records.push(MonitorRecord { t: 0.1 * i as f64, total_volume: 2.0, ..Default::default() });
        }
        s.fill_measured_dpdt();
        s
    }

    #[test]
    fn stationary_run_satisfies_everything() {
        let rep = audit_bounds(&flat_series(), &AuditConfig::default()).unwrap();
        assert!(rep.all_satisfied(), "{}", rep.summary());
        assert_eq!(rep.get("phi_bound").unwrap().constant, Some(0.0));
    }

    #[test]
    fn spike_is_located() {
        let mut s = flat_series();
        s.records[6].sup_phidot = 0.5;
        s.records[7].sup_abs_phi = 0.25;
        let rep = audit_bounds(&s, &AuditConfig::default()).unwrap();
        let v = rep.get("sup_phidot_nonincreasing").unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.location.unwrap().0, 6);
        assert_eq!(v.max_violation, 0.5);
        let v = rep.get("phi_bound").unwrap();
        assert!(!v.satisfied);
        assert_eq!(v.location.unwrap().0, 7);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(audit_bounds(&MonitorSeries::new(1), &AuditConfig::default()), Err(DiagnosticsError::EmptySeries)));
    }

    #[test]
    fn audit_is_pure() {
        let mut s = flat_series();
        s.records[3].p = 1.0;
        let c = AuditConfig::default();
        assert_eq!(audit_bounds(&s, &c).unwrap(), audit_bounds(&s, &c).unwrap());
    }

    #[test]
    fn report_csv_lists_every_monitor() {
        let rep = audit_bounds(&flat_series(), &AuditConfig::default()).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), rep.verdicts.len() + 1);
    }
}
