//! Monitored quantities along flow runs and audits of their expected bounds.

pub mod audit;
pub mod decay;
pub mod series;

pub use audit::{audit_bounds, AuditConfig, EstimateReport, Verdict};
pub use decay::{fit_decay, fit_series, DecayFit, DecayModel, Quantity};
pub use series::{format_float, lagrange_derivative, MonitorRecord, MonitorSeries, MONITOR_COLUMNS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("empty series")]
    EmptySeries,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
