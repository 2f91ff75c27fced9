//! Bearings-only target motion analysis laboratory.
//!
//! Simulates a constant-velocity target observed by a maneuvering ownship,
//! estimates the target's initial range, course and speed by exhaustive grid
//! search under two cost functions (equidistant line segments and bearing
//! differences), and measures the non-Gaussianity that the polar to Cartesian
//! transformation introduces into equidistant segments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod config;
pub mod costs;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod rng;
pub mod scenario;

pub use bias::{bias_experiment, kurtosis, range_sweep, segment_sample, BiasConfig, BiasReport, Transform};
pub use costs::{cost_bearing_diff, cost_equidistant, derive_speed, predicted_bearings, segment_stats};
pub use error::{Error, Result};
pub use estimator::{
    grid_search, monte_carlo, param_error, rms_trajectory_error, Anchor, CostKind, EstimationResult, GridAxis,
    MonteCarloSummary, SearchSpace,
};
pub use geometry::{BearingDeg, CourseDeg, Position, Velocity};
pub use scenario::{BearingSeries, OwnshipLeg, Scenario, TargetParams};
