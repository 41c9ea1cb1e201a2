//! Batch front end: TOML run configuration, subcommand dispatch and output
//! files.
//!
//! A configuration file holds an optional `command` (`verify`, `flow-torus`,
//! `flow-p1`, `cone`), an optional `out` directory and one section per engine:
//!
//! ```toml
//! command = "flow-torus"
//!
//! [torus]
//! n = 1
//! resolution = 64
//! t_max = 2.0
//! [torus.initial]
//! kind = "cosine"
//! amplitude = 0.05
//! [torus.dt]
//! safety = 0.9
//!
//! [audit]
//! residual_tol = 1e-3
//! ```
//!
//! Every key is optional and unknown keys are rejected. `[p1]` takes the
//! sphere-flow keys, `[cone]` takes `model` and `class`, `[verify]` takes
//! `seed`, `resolution`, `metrics` and `pointwise_samples`.

use crate::cone::{self, ConeError, REPORT_COLUMNS};
use crate::diagnostics::{audit_bounds, format_float, AuditConfig, DiagnosticsError};
use crate::flow::{self, FlowError, Outcome, TorusFlowConfig};
use crate::geom::snapshot::{write_scalar_csv, write_snapshot, Snapshot};
use crate::geom::GeomError;
use crate::p1::{self, P1Error, P1FlowConfig};
use crate::verify::{run_verify, VerifyConfig};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable overriding the output directory of a config file.
pub const OUT_ENV: &str = "KRFLOW_OUT";
pub const DEFAULT_OUT: &str = "krflow-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config key `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("config command `{found}` does not match subcommand `{expected}`")]
    CommandMismatch { expected: String, found: String },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Sphere(#[from] P1Error),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 4 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. }
            | CliError::Validation { .. }
            | CliError::CommandMismatch { .. }
            | CliError::Cone(_)
            | CliError::Flow(FlowError::Config(_))
            | CliError::Sphere(P1Error::Config(_)) => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    FlowTorus,
    FlowP1,
    Cone,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::FlowTorus => "flow-torus",
            Command::FlowP1 => "flow-p1",
            Command::Cone => "cone",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub seed: u64,
    /// `n = 1` coarse grid; the fine grid is twice as dense.
    pub resolution: Option<usize>,
    pub metrics: usize,
    pub pointwise_samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        let d = VerifyConfig::default();
        Self { seed: d.seed, resolution: None, metrics: d.metrics, pointwise_samples: d.pointwise_samples }
    }
}

impl VerifySection {
    pub fn to_config(&self) -> VerifyConfig {
        let cfg = VerifyConfig {
            seed: self.seed,
            metrics: self.metrics,
            pointwise_samples: self.pointwise_samples,
            ..Default::default()
        };
        match self.resolution {
            Some(r) => cfg.with_resolution(r),
            None => cfg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    pub model: String,
    /// Comma-separated coefficients.
    pub class: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub torus: TorusFlowConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub p1: P1FlowConfig,
    pub cone: Option<ConeSection>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// `"key: why"` messages from engine validation.
fn split_key(prefix: &str, message: &str) -> CliError {
    match message.split_once(": ") {
        Some((key, why)) => CliError::Validation { key: format!("{prefix}.{key}"), message: why.to_string() },
        None => CliError::Validation { key: prefix.to_string(), message: message.to_string() },
    }
}

/// Parses and validates a configuration; defaults fill missing keys.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        if let Some(rest) = message.strip_prefix("unknown field `") {
            let key = rest.split('`').next().unwrap_or_default().to_string();
            return CliError::Validation { key, message };
        }
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        CliError::Parse { line, column, message }
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.torus.validate().map_err(|e| match e {
        FlowError::Config(m) => split_key("torus", &m),
        other => CliError::Flow(other),
    })?;
    cfg.p1.validate().map_err(|e| match e {
        P1Error::Config(m) => split_key("p1", &m),
        other => CliError::Sphere(other),
    })?;
    if cfg.verify.metrics == 0 {
        return Err(CliError::Validation { key: "verify.metrics".into(), message: "must be at least 1".into() });
    }
    if let Some(r) = cfg.verify.resolution {
        if r < 8 || r % 2 != 0 {
            return Err(CliError::Validation {
                key: "verify.resolution".into(),
                message: "must be even and at least 8".into(),
            });
        }
    }
    if let Some(c) = &cfg.cone {
        cone::catalog::<f64>(&c.model)
            .map_err(|e| CliError::Validation { key: "cone.model".into(), message: e.to_string() })?;
        cone::parse_class(&c.class)
            .map_err(|e| CliError::Validation { key: "cone.class".into(), message: e.to_string() })?;
    }
    if cfg.command == Some(Command::Cone) && cfg.cone.is_none() {
        return Err(CliError::Validation { key: "cone".into(), message: "section required for the cone command".into() });
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Output directory: explicit flag, then the environment override, then the
/// config file, then the default.
pub fn resolve_out(flag: Option<&Path>, cfg: Option<&RunConfig>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV) {
        return PathBuf::from(p);
    }
    cfg.and_then(|c| c.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| CliError::Io { path, source })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Runs `command` with `cfg`, writing files under `out` and a human-readable
/// summary to `console`. Returns the process exit code.
pub fn dispatch(command: Command, cfg: &RunConfig, out: &Path, console: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(found) = cfg.command {
        if found != command {
            return Err(CliError::CommandMismatch { expected: command.name().into(), found: found.name().into() });
        }
    }
    match command {
        Command::Verify => verify_command(&cfg.verify, out, console),
        Command::FlowTorus => torus_command(&cfg.torus, &cfg.audit, out, console),
        Command::FlowP1 => sphere_command(&cfg.p1, out, console),
        Command::Cone => {
            let c = cfg.cone.as_ref().ok_or_else(|| CliError::Validation {
                key: "cone".into(),
                message: "section required for the cone command".into(),
            })?;
            cone_command(&c.model, &c.class, out, console)
        }
    }
}

/// Writes `verify.csv` and prints the table; exit 1 when any check fails.
pub fn verify_command(section: &VerifySection, out: &Path, console: &mut dyn Write) -> Result<i32, CliError> {
    let report = run_verify(&section.to_config())?;
    report.write_csv(create(out, "verify.csv")?)?;
    let failures = report.failures().len();
    write!(console, "{}", report.table()).map_err(io_err(out))?;
    writeln!(console, "{} checks, {} failed", report.rows.len(), failures).map_err(io_err(out))?;
    Ok(if failures == 0 { 0 } else { 1 })
}

/// Runs the torus flow and writes `series.csv`, `audit.csv`, `summary.txt`
/// and snapshots of the final and sampled potentials and metrics.
pub fn torus_command(
    cfg: &TorusFlowConfig,
    audit: &AuditConfig,
    out: &Path,
    console: &mut dyn Write,
) -> Result<i32, CliError> {
    let run = flow::run(cfg)?;
    run.series.write_csv(create(out, "series.csv")?)?;
    let report = audit_bounds(&run.series, audit)?;
    report.write_csv(create(out, "audit.csv")?)?;
    let mut summary = format!(
        "outcome {} at t = {}\nsteps {} (rejected {})\nmax step-doubling error {:e}\n",
        run.outcome.label(),
        outcome_time(&run.outcome),
        run.steps,
        run.rejected_steps,
        run.max_step_error
    );
    summary.push_str(&report.summary());
    let mut s = create(out, "summary.txt")?;
    s.write_all(summary.as_bytes()).map_err(io_err(out))?;
    s.flush().map_err(io_err(out))?;

    let final_phi = run.gauged_potential();
    write_snap(out, "phi_final.snap", &Snapshot::Scalar(final_phi.clone()))?;
    write_snap(out, "metric_final.snap", &Snapshot::Matrix(run.final_metric.matrices().clone()))?;
    if final_phi.chart().dim() == 1 {
        write_scalar_csv(create(out, "phi_final.csv")?, &final_phi)?;
    }
    for (i, sample) in run.samples.iter().enumerate() {
        write_snap(out, &format!("phi_sample{i}.snap"), &Snapshot::Scalar(sample.phi.clone()))?;
        write_snap(out, &format!("metric_sample{i}.snap"), &Snapshot::Matrix(sample.metric.matrices().clone()))?;
    }
    write!(console, "{summary}").map_err(io_err(out))?;
    Ok(run.outcome.exit_code())
}

fn write_snap(out: &Path, name: &str, snap: &Snapshot) -> Result<(), CliError> {
    let mut w = create(out, name)?;
    write_snapshot(&mut w, snap)?;
    w.flush().map_err(io_err(out))
}

fn outcome_time(o: &Outcome) -> f64 {
    match o {
        Outcome::Converged { t } | Outcome::TmaxReached { t } => *t,
        Outcome::Singular { t_est } => *t_est,
    }
}

/// Relative distance from the area-law collapse time within which a
/// singular outcome of the sphere flow counts as the expected collapse.
pub const COLLAPSE_TOL: f64 = 1e-3;

/// Sphere flow exit code: 0 for collapse at the area-law time, 2 for `t_max`,
/// 3 for any other singularity.
pub fn sphere_exit_code(outcome: &Outcome, collapse_time: f64) -> i32 {
    match outcome {
        Outcome::Singular { t_est } if (t_est - collapse_time).abs() <= COLLAPSE_TOL * collapse_time => 0,
        other => other.exit_code(),
    }
}

/// Runs the sphere flow; writes `p1_series.csv`, `p1_profile.csv` (final
/// `τ`, metric ratio, potential) and `summary.txt`.
pub fn sphere_command(cfg: &P1FlowConfig, out: &Path, console: &mut dyn Write) -> Result<i32, CliError> {
    let flow = p1::P1Flow::new(cfg.clone())?;
    let run = p1::run_1d(cfg.clone())?;
    run.write_csv(create(out, "p1_series.csv")?)?;
    {
        let mut w = csv::Writer::from_writer(create(out, "p1_profile.csv")?);
        w.write_record(["tau", "ratio", "psi"])?;
        let tau = flow.chart().tau();
        let ratio = flow.profile(&run.final_state.psi, run.final_state.t).ratio;
        for j in 0..tau.len() {
            w.write_record([tau[j], ratio[j], run.final_state.psi[j]].iter().map(|&v| format_float(v)))?;
        }
        w.flush().map_err(io_err(out))?;
    }
    let worst_area = run.records.iter().map(|r| r.area_law_residual).fold(0.0, f64::max);
    let summary = format!(
        "outcome {} at t = {}\narea-law collapse time {}\nsteps {} (rejected {})\nmax area-law residual {:e}\n",
        run.outcome.label(),
        outcome_time(&run.outcome),
        run.collapse_time,
        run.steps,
        run.rejected_steps,
        worst_area
    );
    let mut s = create(out, "summary.txt")?;
    s.write_all(summary.as_bytes()).map_err(io_err(out))?;
    s.flush().map_err(io_err(out))?;
    write!(console, "{summary}").map_err(io_err(out))?;
    Ok(sphere_exit_code(&run.outcome, run.collapse_time))
}

/// Prints the terminal report as CSV and writes it to `cone.csv`.
pub fn cone_command(model: &str, class: &str, out: &Path, console: &mut dyn Write) -> Result<i32, CliError> {
    let row = cone::analyze(model, class)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(REPORT_COLUMNS)?;
        w.write_record(&row)?;
        w.flush().map_err(io_err(out))?;
    }
    let mut f = create(out, "cone.csv")?;
    f.write_all(&buf).map_err(io_err(out))?;
    f.flush().map_err(io_err(out))?;
    console.write_all(&buf).map_err(io_err(out))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_torus_config_uses_defaults() {
        let cfg = parse_config("command = \"flow-torus\"\n[torus]\nresolution = 32\n").unwrap();
        assert_eq!(cfg.command, Some(Command::FlowTorus));
        assert_eq!(cfg.torus.resolution, 32);
        assert_eq!(cfg.torus.n, TorusFlowConfig::default().n);
    }

    #[test]
    fn misspelled_key_is_named() {
        let err = parse_config("[torus]\ndt_polciy = 1\n").unwrap_err();
        match &err {
            CliError::Validation { key, .. } => assert_eq!(key, "dt_polciy"),
            other => panic!("{other:?}"),
        }
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn syntax_error_reports_line() {
        match parse_config("command = \"cone\"\n[cone\nmodel = 1\n").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn engine_validation_names_section_key() {
        match parse_config("[torus]\nresolution = 9\n").unwrap_err() {
            CliError::Validation { key, .. } => assert_eq!(key, "torus.resolution"),
            other => panic!("{other:?}"),
        }
        match parse_config("[p1]\nsafety = 2.0\n").unwrap_err() {
            CliError::Validation { key, .. } => assert_eq!(key, "p1.safety"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cone_config_dispatches() {
        let cfg = parse_config("command = \"cone\"\n[cone]\nmodel = \"BlpP2\"\nclass = \"1,3\"\n").unwrap();
        let dir = std::env::temp_dir().join(format!("krflow-cone-{}", std::process::id()));
        let mut console = Vec::new();
        assert_eq!(dispatch(Command::Cone, &cfg, &dir, &mut console).unwrap(), 0);
        let text = String::from_utf8(console).unwrap();
        assert_eq!(text.lines().nth(1), Some("BlpP2,\"1,3\",1,d,\"0,1\",0"));
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let cfg = parse_config("command = \"verify\"\n").unwrap();
        let err = dispatch(Command::FlowP1, &cfg, Path::new("unused"), &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sphere_exit_codes() {
        assert_eq!(sphere_exit_code(&Outcome::Singular { t_est: 0.9999 }, 1.0), 0);
        assert_eq!(sphere_exit_code(&Outcome::Singular { t_est: 0.5 }, 1.0), 3);
        assert_eq!(sphere_exit_code(&Outcome::TmaxReached { t: 0.5 }, 1.0), 2);
    }
}
