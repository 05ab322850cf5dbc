//! Lagrangian evolution of closed planar curves driven by a curvature
//! dependent normal velocity, with tangential redistribution of grid points.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod output;
pub mod point;
pub mod redistribution;
pub mod scenario;
pub mod solver;
pub mod study;
pub mod svg;

pub use error::{Error, Result};
pub use geometry::{DiscreteGeometry, PlanarCurve};
pub use linalg::CyclicTridiagonal;
pub use model::{AnisotropyField, Partials, VelocityModel};
pub use point::Point;
pub use redistribution::{RedistributionStrategy, ThetaField};
pub use solver::{
    run, step, Diagnostics, IntrinsicState, RunReport, Snapshot, SolverConfig, StopCriteria, Termination,
    Trajectory,
};
