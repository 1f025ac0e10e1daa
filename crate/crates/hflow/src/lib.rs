//! Disk-type surfaces of prescribed mean curvature under a Plateau boundary
//! condition, computed by time discretization: each step minimizes the
//! Dirichlet energy plus a curvature volume term plus a proximal penalty
//! over surfaces spanning a fixed Jordan curve inside a convex obstacle.
//!
//! The crate splits into:
//!
//! - geometry: [`mesh`] (the reference disk), [`curve`] (spline boundary
//!   curves with a three-point parametrization lock), [`obstacle`];
//! - the functional: [`energy`] (Dirichlet energy, curvature volume,
//!   gradients, conformality and inner-variation diagnostics),
//!   [`curvature`] (the prescribed field H);
//! - the constrained class: [`monotone`] (weighted isotonic projection of
//!   boundary phases), [`state`] (interior positions plus boundary phases);
//! - solvers and checks: [`flow`] (minimizing movements and the stationary
//!   solver), [`residuals`] (weak Neumann and stationarity residuals),
//!   [`admissibility`] (the smallness conditions on H);
//! - plumbing: [`config`], [`io`], [`cli`].
//!
//! The [`guide`] module holds the long-form manual; its code blocks compile
//! and run as doc-tests.

pub mod admissibility;
pub mod cli;
pub mod config;
pub mod curvature;
pub mod curve;
pub mod energy;
pub mod flow;
pub mod io;
pub mod mesh;
pub mod monotone;
pub mod obstacle;
pub mod residuals;
pub mod state;
pub mod v3;

pub mod guide;

pub use admissibility::{check_conditions, ConditionReport, ConditionVerdict};
pub use config::{parse_config, serialize_config, RunConfig, SchemaError};
pub use curvature::PrescribedCurvature;
pub use curve::{circle_samples, curve_from_file, curve_from_samples, JordanCurve};
pub use energy::{dirichlet, f_gradient, f_value, h_volume, hopf_residual};
pub use flow::{run_flow, rothe_step, solve_stationary, FlowConfig, FlowTrace, StepRecord};
pub use mesh::{build_disk_mesh, DiskMesh};
pub use monotone::project_monotone;
pub use obstacle::Obstacle;
pub use residuals::{neumann_residual, stationarity_residual};
pub use state::{initial_state, SurfaceState};
