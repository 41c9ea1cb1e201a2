//! Acceptance run: one PASS/FAIL line per criterion on stderr (bypassing the
//! test harness capture), printed in order once all have run, then an
//! assertion over all criteria except the documented known deviation.
//!
//! Release-like speed matters here; the workspace test profile is optimized.

use kahler_flow::cone::{catalog, Behavior, CohomologyClass, ManifoldModel};
use kahler_flow::diagnostics::{audit_bounds, AuditConfig, EstimateReport};
use kahler_flow::flow::{self, rescaling_correspondence, FlowMode, InitialPotential, Outcome, RunOutput, TorusFlowConfig};
use kahler_flow::geom::{CMat, MatrixField};
use kahler_flow::p1::{run_1d, P1FlowConfig, Perturbation};
use kahler_flow::verify::{fubini_study_residual, run_pointwise, run_verify, VerifyConfig};
use num_rational::Rational64;
use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

// Criterion 1.
const FS_TOL: f64 = 1e-8;
const FS_RUNTIME: Duration = Duration::from_secs(1);
// Criterion 2.
const IDENTITY_RUNTIME: Duration = Duration::from_secs(120);
// Criterion 3.
const POINTWISE_SAMPLES: usize = 1000;
const POINTWISE_RUNTIME: Duration = Duration::from_secs(10);
// Criterion 4, n = 1; n = 2 scales the absolute tolerances by 100.
const TORUS_RICCI_TOL: f64 = 1e-6;
const TORUS_METRIC_TOL: f64 = 1e-5;
const TORUS_VOLUME_TOL: f64 = 1e-8;
const TORUS_MONOTONE_SLACK: f64 = 1e-10;
const P_IDENTITY_REL_TOL: f64 = 0.05;
const P_IDENTITY_FLOOR: f64 = 1e-8;
const N2_FACTOR: f64 = 100.0;
const TORUS_N1_RUNTIME: Duration = Duration::from_secs(60);
const TORUS_N2_RUNTIME: Duration = Duration::from_secs(600);
// Criterion 5.
const RESCALING_TIMES: [f64; 3] = [0.25, 0.5, 1.0];
const RESCALING_TOL: f64 = 1e-5;
// Criterion 6.
const SHRINK_PSI_TOL: f64 = 1e-8;
const SHRINK_AREA_REL_TOL: f64 = 1e-6;
const SHRINK_T_LAST: f64 = 0.95;
const SHRINK_COLLAPSE_TOL: f64 = 1e-3;
const SHRINK_RUNTIME: Duration = Duration::from_secs(30);
// Criterion 7.
const AREA_LAW_MEAN_TOL: f64 = 5e-3;
const AREA_LAW_WINDOW: f64 = 0.8;
const COLLAPSE_REL_TOL: f64 = 1e-2;
const ROUNDING_FRACTIONS: [f64; 5] = [0.0, 0.225, 0.45, 0.675, 0.9];
const PERTURBED_RUNTIME: Duration = Duration::from_secs(60);
// Criterion 8.
const CONE_RUNTIME: Duration = Duration::from_secs(1);

/// Criterion 4 at `n = 2`: the literal `−(1/n)` coefficient of the `dP/dt`
/// identity is off by a factor `n`; the line is printed, not asserted.
const KNOWN_DEVIATION: &str = "4";

struct Line {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn report(lines: &mut Vec<Line>, id: &'static str, passed: bool, detail: String) {
    lines.push(Line { id, passed, detail });
}

fn criterion_1(lines: &mut Vec<Line>) {
    let start = Instant::now();
    let r1 = fubini_study_residual(1).unwrap();
    let r2 = fubini_study_residual(2).unwrap();
    let el = start.elapsed();
    report(
        lines,
        "1",
        r1 < FS_TOL && r2 < FS_TOL && el < FS_RUNTIME,
        format!("Fubini-Study Einstein residual n=1 {r1:.2e}, n=2 {r2:.2e} (tol {FS_TOL:e}), {el:.2?}"),
    );
}

fn criteria_2_3(lines: &mut Vec<Line>) {
    let start = Instant::now();
    let full = run_verify(&VerifyConfig::default()).unwrap();
    let el = start.elapsed();
    let identity: Vec<_> = full.rows.iter().filter(|r| r.suite == "identity").collect();
    let failed: Vec<String> =
        identity.iter().filter(|r| !r.passed).map(|r| format!("{}@n{}r{}", r.check, r.n, r.resolution)).collect();
    let order = |n| full.find("fd4_commutator_order", n, if n == 1 { 64 } else { 16 }).unwrap().value;
    report(
        lines,
        "2",
        failed.is_empty() && !identity.is_empty() && el < IDENTITY_RUNTIME,
        format!(
            "{} identity rows, failures {:?}, fourth-order ratio within x{:.3} (n=1) / x{:.3} (n=2) of nominal, {el:.1?}",
            identity.len(),
            failed,
            order(1),
            order(2)
        ),
    );

    let start = Instant::now();
    let pw = run_pointwise(POINTWISE_SAMPLES, 7);
    let el = start.elapsed();
    let violations: f64 = pw.rows.iter().map(|r| r.value).sum();
    report(
        lines,
        "3",
        pw.all_passed() && violations == 0.0 && pw.rows.len() == 5 && el < POINTWISE_RUNTIME,
        format!("{} checks x {POINTWISE_SAMPLES} samples, {violations} violations, {el:.2?}", pw.rows.len()),
    );
}

fn torus_config(n: usize) -> TorusFlowConfig {
    if n == 1 {
        TorusFlowConfig {
            n: 1,
            resolution: 128,
            initial: InitialPotential::Cosine { amplitude: 0.05 },
            ricci_tol: TORUS_RICCI_TOL,
            t_max: 5.0,
            sample_times: RESCALING_TIMES.iter().map(|t| t.exp_m1()).collect(),
            ..Default::default()
        }
    } else {
        TorusFlowConfig {
            n: 2,
            resolution: 16,
            initial: InitialPotential::Cosine { amplitude: 0.05 },
            ricci_tol: TORUS_RICCI_TOL * N2_FACTOR,
            t_max: 5.0,
            monitor_every: 0.01,
            ..Default::default()
        }
    }
}

fn torus_audit(n: usize, factor: f64) -> AuditConfig {
    let scale = if n == 1 { 1.0 } else { N2_FACTOR };
    AuditConfig {
        monotone_slack: TORUS_MONOTONE_SLACK * scale,
        volume_tol: TORUS_VOLUME_TOL * scale,
        p_identity_rel_tol: P_IDENTITY_REL_TOL,
        p_identity_floor: P_IDENTITY_FLOOR,
        p_identity_factor: factor,
        ..Default::default()
    }
}

struct TorusCheck {
    passed: bool,
    detail: String,
}

/// Everything in criterion 4 except the `dP/dt` identity coefficient, which
/// the caller chooses.
fn check_torus(run: &RunOutput, n: usize, audit: &EstimateReport, elapsed: Duration, budget: Duration) -> TorusCheck {
    let scale = if n == 1 { 1.0 } else { N2_FACTOR };
    let last = run.series.records.last().unwrap();
    let flat = MatrixField::constant(*run.final_metric.chart(), CMat::identity(n)).unwrap();
    let dev = run.deviation_from(&flat).unwrap();
    let converged = matches!(run.outcome, Outcome::Converged { .. });
    let verdict = |name: &str| audit.get(name).unwrap();
    let needed = ["volume_drift", "sup_phidot_nonincreasing", "p_nonincreasing", "jensen_nonincreasing", "p_identity"];
    let failed: Vec<&str> = needed.iter().copied().filter(|k| !verdict(k).satisfied).collect();
    let passed = converged
        && last.ricci_residual < TORUS_RICCI_TOL * scale
        && dev < TORUS_METRIC_TOL * scale
        && failed.is_empty()
        && elapsed < budget;
    TorusCheck {
        passed,
        detail: format!(
            "n={n}: {} at t={:.3}, sup|Ric| {:.2e}, sup|g-flat| {:.2e}, volume drift {:.2e}, \
             dP/dt rel err {:.2e}, failed audits {:?}, {elapsed:.1?}",
            run.outcome.label(),
            last.t,
            last.ricci_residual,
            dev,
            verdict("volume_drift").constant.unwrap_or(f64::NAN),
            verdict("p_identity").constant.unwrap_or(f64::NAN),
            failed
        ),
    }
}

fn csv_bytes(run: &RunOutput, audit: &EstimateReport) -> (Vec<u8>, Vec<u8>) {
    let mut series = Vec::new();
    run.series.write_csv(&mut series).unwrap();
    let mut a = Vec::new();
    audit.write_csv(&mut a).unwrap();
    (series, a)
}

fn criteria_4_5_9(lines: &mut Vec<Line>) {
    let cfg1 = torus_config(1);
    let start = Instant::now();
    let run1 = flow::run(&cfg1).unwrap();
    let el1 = start.elapsed();
    // At n = 1 the literal and corrected identities coincide.
    let audit1 = audit_bounds(&run1.series, &torus_audit(1, 1.0)).unwrap();
    let c1 = check_torus(&run1, 1, &audit1, el1, TORUS_N1_RUNTIME);

    let cfg2 = torus_config(2);
    let start = Instant::now();
    let run2 = flow::run(&cfg2).unwrap();
    let el2 = start.elapsed();
    let literal = audit_bounds(&run2.series, &torus_audit(2, 0.5)).unwrap();
    let corrected = audit_bounds(&run2.series, &torus_audit(2, 1.0)).unwrap();
    let c2_literal = check_torus(&run2, 2, &literal, el2, TORUS_N2_RUNTIME);
    let c2 = check_torus(&run2, 2, &corrected, el2, TORUS_N2_RUNTIME);
    report(
        lines,
        "4",
        c1.passed && c2_literal.passed,
        format!(
            "{} | literal -(1/n) identity {} | corrected -∫|∂φ̇|²ωⁿ identity: {}",
            c1.detail,
            c2_literal.detail,
            if c2.passed { "PASS" } else { "FAIL" }
        ),
    );
    lines.push(Line { id: "4-corrected", passed: c1.passed && c2.passed, detail: c2.detail });

    let normalized = TorusFlowConfig {
        mode: FlowMode::Normalized,
        t_max: *RESCALING_TIMES.last().unwrap(),
        ricci_tol: 1e-30,
        sample_times: RESCALING_TIMES.to_vec(),
        ..cfg1.clone()
    };
    let start = Instant::now();
    let run_n = flow::run(&normalized).unwrap();
    let dev = rescaling_correspondence(&run1, &run_n, &RESCALING_TIMES).unwrap();
    report(
        lines,
        "5",
        dev < RESCALING_TOL,
        format!("max deviation {dev:.2e} at t in {RESCALING_TIMES:?} (tol {RESCALING_TOL:e}), {:.1?}", start.elapsed()),
    );

    let rerun = flow::run(&cfg1).unwrap();
    let audit_again = audit_bounds(&rerun.series, &torus_audit(1, 1.0)).unwrap();
    let (s1, a1) = csv_bytes(&run1, &audit1);
    let (s2, a2) = csv_bytes(&rerun, &audit_again);
    report(
        lines,
        "9",
        s1 == s2 && a1 == a2 && !s1.is_empty(),
        format!("series.csv {} bytes identical: {}, audit.csv identical: {}", s1.len(), s1 == s2, a1 == a2),
    );
}

fn criterion_6(lines: &mut Vec<Line>) {
    let start = Instant::now();
    let run = run_1d(P1FlowConfig { scale: 2.0, ..Default::default() }).unwrap();
    let el = start.elapsed();
    let mut sup_psi: f64 = 0.0;
    let mut area_err: f64 = 0.0;
    for r in run.records.iter().filter(|r| r.t <= SHRINK_T_LAST + 1e-12) {
        sup_psi = sup_psi.max(r.sup_psi);
        area_err = area_err.max((r.area - 4.0 * PI * (1.0 - r.t)).abs() / (4.0 * PI));
    }
    let t_obs = match run.outcome {
        Outcome::Singular { t_est } => t_est,
        other => panic!("round sphere did not collapse: {other:?}"),
    };
    report(
        lines,
        "6",
        sup_psi < SHRINK_PSI_TOL
            && area_err < SHRINK_AREA_REL_TOL
            && (t_obs - 1.0).abs() < SHRINK_COLLAPSE_TOL
            && el < SHRINK_RUNTIME,
        format!("sup|psi| {sup_psi:.2e}, area error {area_err:.2e} x 4pi, T_obs {t_obs:.6}, {el:.2?}"),
    );
}

fn criterion_7(lines: &mut Vec<Line>) {
    let start = Instant::now();
    let run = run_1d(P1FlowConfig {
        degree: 48,
        perturbation: Some(Perturbation { degree: 2, amplitude: 0.08 }),
        record_interval: 0.025,
        ..Default::default()
    })
    .unwrap();
    let el = start.elapsed();
    let area0 = run.records[0].area;
    let predicted = area0 / (4.0 * PI);
    let t_obs = match run.outcome {
        Outcome::Singular { t_est } => t_est,
        other => panic!("perturbed sphere did not collapse: {other:?}"),
    };
    let window: Vec<f64> = run
        .records
        .iter()
        .filter(|r| r.t <= AREA_LAW_WINDOW * t_obs + 1e-12)
        .map(|r| r.area_law_residual)
        .collect();
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let devs: Vec<f64> =
        ROUNDING_FRACTIONS.iter().map(|f| run.record_near(f * t_obs).unwrap().round_deviation).collect();
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    report(
        lines,
        "7",
        mean < AREA_LAW_MEAN_TOL
            && (t_obs - predicted).abs() < COLLAPSE_REL_TOL * predicted
            && monotone
            && el < PERTURBED_RUNTIME,
        format!(
            "mean area-law residual {mean:.2e} over {} records, T_obs {t_obs:.6} vs area/4pi {predicted:.6}, \
             round deviation {:?}, {el:.2?}",
            window.len(),
            devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    );
}

fn exact(coeffs: &[i64]) -> CohomologyClass<Rational64> {
    CohomologyClass::new(coeffs.iter().map(|&c| Rational64::from_integer(c)).collect())
}

fn criterion_8(lines: &mut Vec<Line>) {
    let start = Instant::now();
    let r = |n: i64| Some(Rational64::from_integer(n));
    // (model, class, T, behavior, boundary direction if (d))
    let cases: [(&str, &[i64], Option<Rational64>, Behavior, Option<&[i64]>); 6] = [
        ("P1", &[2], r(1), Behavior::HitsZero, None),
        ("P1xP1", &[2, 2], r(2), Behavior::HitsZero, None),
        ("P1xP1", &[3, 1], r(1), Behavior::HitsBoundaryNonzero, Some(&[1, 0])),
        ("ExS", &[1, 1], None, Behavior::ImmortalInterior, None),
        ("BlpP2", &[1, 3], r(1), Behavior::HitsBoundaryNonzero, Some(&[0, 1])),
        ("BlpP2", &[1, 2], r(1), Behavior::HitsZero, None),
    ];
    let mut bad = Vec::new();
    for (name, class, t, behavior, direction) in cases {
        let model: ManifoldModel<Rational64> = catalog(name).unwrap();
        let rep = model.max_time(&exact(class)).unwrap();
        let mut ok = rep.time == t && rep.behavior == behavior;
        if let (Some(d), Some(b)) = (direction, &rep.boundary) {
            // Boundary proportional to the expected direction.
            let d = exact(d);
            let k = (0..d.dim()).find(|&i| d.coeffs[i] != Rational64::from_integer(0)).unwrap();
            let s = b.coeffs[k] / d.coeffs[k];
            ok &= s > Rational64::from_integer(0) && *b == d.scale(&s);
        }
        if !ok {
            bad.push(format!("{name} {class:?}: {rep:?}"));
        }
    }
    let el = start.elapsed();
    report(lines, "8", bad.is_empty() && el < CONE_RUNTIME, format!("6 catalog cases, mismatches {bad:?}, {el:.2?}"));
}

#[test]
fn acceptance_criteria() {
    let mut lines = Vec::new();
    criterion_1(&mut lines);
    criteria_2_3(&mut lines);
    criteria_4_5_9(&mut lines);
    criterion_6(&mut lines);
    criterion_7(&mut lines);
    criterion_8(&mut lines);

    lines.sort_by_key(|l| l.id);
    let mut err = std::io::stderr().lock();
    for l in lines.iter().filter(|l| l.id.len() == 1) {
        let tag = if l.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "criterion {}: {tag} {}", l.id, l.detail);
    }
    drop(err);

    let corrected = lines.iter().find(|l| l.id == "4-corrected").unwrap();
    assert!(corrected.passed, "criterion 4 with the corrected identity: {}", corrected.detail);
    let unexpected: Vec<&Line> = lines.iter().filter(|l| !l.passed && l.id != KNOWN_DEVIATION).collect();
    assert!(
        unexpected.is_empty(),
        "{}",
        unexpected.iter().map(|l| format!("{}: {}", l.id, l.detail)).collect::<Vec<_>>().join("\n")
    );
}
