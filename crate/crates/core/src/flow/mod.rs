//! Parabolic complex Monge-Ampère time-stepping on torus charts.

pub mod config;
pub mod engine;
pub mod rescale;
pub mod run;

pub use config::{DtPolicy, FlowMode, InitialPotential, TorusFlowConfig};
pub use engine::{build_volume_form, FlowState, TorusFlow, VolumeForm};
pub use rescale::rescaling_correspondence;
pub use run::{run, Outcome, RunOutput, Sample};

use crate::geom::GeomError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("config error: {0}")]
    Config(String),
    #[error("step {dt:e} exceeds the stability limit {limit:e}")]
    StiffnessRejection { dt: f64, limit: f64 },
    #[error("flow left the Kähler cone near t = {t_est}")]
    SingularTime { t_est: f64 },
    #[error("reference form is not closed (residual {0:e})")]
    NotClosed(f64),
    #[error("reference form is not exact on the torus (residual {0:e})")]
    NotExact(f64),
    #[error("incompatible runs: {0}")]
    Incompatible(String),
}
