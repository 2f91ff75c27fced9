use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: observer and target coincide")]
    DegenerateGeometry,

    #[error("invalid range {0} m (must be > 0)")]
    InvalidRange(f64),

    #[error("bearing line and track line are parallel (|sin| = {0:e})")]
    NearParallel(f64),

    #[error("time {t} s is outside the ownship plan window [0, {end}] s")]
    OutOfWindow { t: f64, end: f64 },

    #[error("candidate track is parallel to bearing line {0}")]
    SingularCandidate(usize),

    #[error("candidate track collapses: mean segment length {0} m")]
    DegenerateTrack(f64),

    #[error("length mismatch: {left} vs {right}")]
    ShapeError { left: usize, right: usize },

    #[error("search space has no cells")]
    EmptySearchSpace,

    #[error("every cell in the search space has infinite cost")]
    NoFeasibleCandidate,

    #[error("zero-variance sample; kurtosis undefined")]
    DegenerateDistribution,

    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("draw rejected: noisy bearing line parallel to target track")]
    RejectedDraw,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
