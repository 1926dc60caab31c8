//! Monte Carlo laboratory for k-coverage thresholds of random point samples
//! on compact manifolds with boundary.
//!
//! The crate is organised bottom-up:
//!
//! * [`manifold`]: a catalog of closed-form geometries (cube, disk, solid
//!   ball, sphere, spherical cap) with exact distances and measures.
//! * [`sampling`]: reproducible binomial, density-weighted and Poissonized
//!   samples.
//! * [`coverage`]: certified interval estimates of coverage thresholds,
//!   covered regions, packing and covering estimates.
//! * [`limits`]: the limiting constants, transforms, distribution functions
//!   and strong-law limits. Generic over the float type.
//! * [`harness`]: replicated experiments and their CSV/JSON outputs.
//! * [`selftest`]: quick invariant checks used by the `selftest` command.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod harness;
pub mod limits;
pub mod manifold;
pub mod sampling;
pub mod scalar;
pub mod selftest;

pub use coverage::{
    build_grid, coverage_threshold, coverage_threshold_refined, covered_region,
    covering_estimate, interior_threshold, interior_threshold_refined, knn_distance,
    packing_estimate, EvalGrid, ThresholdEstimate,
};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentResult};
pub use manifold::{ManifoldSpec, Metric, Point, RegionSpec};
pub use sampling::{DensityConfig, DensitySpec, PointCloud};
pub use scalar::Scalar;

/// Limit-law parameters in double precision.
pub type LimitLaw = limits::LimitLaw<f64>;
/// Limit-law parameters in single precision.
pub type LimitLaw32 = limits::LimitLaw<f32>;
/// Divergence parameter in double precision.
pub type Beta = limits::Beta<f64>;
