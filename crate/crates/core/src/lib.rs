//! Numerical laboratory for the Kähler-Ricci flow.
//!
//! - [`cli`]: TOML run configuration and the `krflow` subcommands.
//! - [`cone`]: cohomology classes, Kähler cones, maximal existence time.
//! - [`geom`]: fields on torus charts, curvature, traces, analytic metrics.
//! - [`flow`]: the scalar Monge-Ampère flow on torus charts.
//! - [`diagnostics`]: monitored quantities and their audits.
//! - [`p1`]: rotation-invariant flow on the Riemann sphere.
//! - [`verify`]: identity suites behind `krflow verify`.

pub mod cli;
pub mod cone;
pub mod diagnostics;
pub mod flow;
pub mod geom;
pub mod p1;
pub mod verify;
