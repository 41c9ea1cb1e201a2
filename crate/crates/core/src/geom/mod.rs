//! Discrete complex differential geometry on torus charts, plus closed-form
//! metrics on coordinate charts of `C^n`.

pub mod analytic;
pub mod chart;
pub mod estimates;
pub mod jet;
pub mod kernel;
pub mod linalg;
pub mod sample;
pub mod snapshot;
pub mod spectral;

pub use analytic::{AnalyticMetric, ConstantMetric, FubiniStudy, NormalCoordinateReport, ProductMetric};
pub use chart::{ComplexField, GridChart, HermitianMetricField, MatrixField, OneOneFormField, ScalarField};
pub use jet::{MetricJet, Riemann, SymmetryResiduals};
pub use kernel::{ChristoffelField, CovariantDerivative, CurvatureField, Kernel, TensorField, TensorKind};
pub use linalg::CMat;
pub use spectral::{Deriv, Differentiator, Scheme};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("field lives on a different chart")]
    ChartMismatch,
    #[error("field has {found} values, chart has {expected} points")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value at grid point {0}")]
    NonFinite(usize),
    #[error("matrix field is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("metric not positive definite at grid point {index} (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { index: usize, min_eig: f64 },
    #[error("singular metric at grid point {index}")]
    SingularMetric { index: usize },
    #[error("unsupported tensor rank: {0}")]
    UnsupportedRank(String),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
}
