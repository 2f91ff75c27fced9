//! Coordinate-transformation bias of equidistant line segments.
//!
//! Two consecutive bearings of a constant-velocity target are perturbed with
//! Gaussian noise and mapped back to Cartesian target positions. The distance
//! between the two mapped positions is one "equidistant segment"; without
//! noise it equals `target_speed * ts`. Repeating the draw gives an empirical
//! segment-length distribution whose kurtosis measures how far the
//! transformed noise is from Gaussian (a Gaussian has kurtosis 3).

use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    bearing_of, initial_target_position, intersect_bearing_with_track, propagate, BearingDeg, CourseDeg, Position,
};
use crate::rng::{self, derive_seed};

/// Fewest accepted draws for which a kurtosis is reported.
pub const MIN_REPORTABLE_RUNS: usize = 1000;
/// Rejected-draw fraction above which a report carries a geometry warning.
pub const REJECT_WARN_FRACTION: f64 = 0.01;
pub const DEFAULT_BINS: usize = 100;
/// Histograms span `[0, mean + HIST_SPAN_SIGMAS * std]`.
pub const HIST_SPAN_SIGMAS: f64 = 6.0;

/// Population kurtosis `m4 / m2²` of `samples`, with `m_p` the p-th central
/// sample moment. A Gaussian scores 3.
pub fn kurtosis(samples: &[f64]) -> Result<f64> {
    Moments::of(samples).map(|m| m.kurtosis)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    mean: f64,
    std: f64,
    kurtosis: f64,
}

impl Moments {
    fn of(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 4 {
            return Err(Error::InsufficientSamples { need: 4, got: n });
        }
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if lo == hi {
            return Err(Error::DegenerateDistribution);
        }
        let nf = n as f64;
        let rough = samples.iter().sum::<f64>() / nf;
        // One refinement pass removes the rounding of the first sum, which
        // otherwise leaks into m4 through the third moment.
        let mean = rough + samples.iter().map(|&x| x - rough).sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for &x in samples {
            let d2 = (x - mean) * (x - mean);
            m2 += d2;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m4 /= nf;
        if !(m2 > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        Ok(Self {
            mean,
            std: m2.sqrt(),
            kurtosis: m4 / (m2 * m2),
        })
    }
}

/// How a noisy bearing is turned back into a target position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Polar to Cartesian at the true range: `own + R * (sin θ, cos θ)`.
    #[default]
    TrueRange,
    /// Intersection of the noisy bearing line with the true target track.
    TrackIntersection,
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true-range" => Ok(Transform::TrueRange),
            "track-intersection" => Ok(Transform::TrackIntersection),
            _ => Err(Error::InvalidConfig(format!("unknown transform {s:?}"))),
        }
    }
}

/// Two-point geometry for the segment-length experiment. Ownship starts at
/// the origin; the target starts `r0` meters away on bearing `b0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasConfig {
    pub r0: f64,
    pub b0: BearingDeg,
    pub target_course: CourseDeg,
    pub target_speed: f64,
    pub ownship_course: CourseDeg,
    pub ownship_speed: f64,
    pub ts: f64,
    pub noise_sigma: f64,
    pub runs: usize,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

impl BiasConfig {
    /// Transform `TrueRange`, 100 histogram bins.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r0: f64,
        b0: f64,
        target_course: f64,
        target_speed: f64,
        ownship_course: f64,
        ownship_speed: f64,
        ts: f64,
        noise_sigma: f64,
        runs: usize,
    ) -> Self {
        Self {
            r0,
            b0: BearingDeg::new(b0),
            target_course: CourseDeg::new(target_course),
            target_speed,
            ownship_course: CourseDeg::new(ownship_course),
            ownship_speed,
            ts,
            noise_sigma,
            runs,
            transform: Transform::TrueRange,
            bins: DEFAULT_BINS,
        }
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return bad(format!("r0 must be > 0, got {}", self.r0));
        }
        if !finite_nonneg(self.target_speed) || !finite_nonneg(self.ownship_speed) {
            return bad("speeds must be >= 0".into());
        }
        if !(self.ts > 0.0) || !self.ts.is_finite() {
            return bad(format!("ts must be > 0, got {}", self.ts));
        }
        if !finite_nonneg(self.noise_sigma) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.runs < MIN_REPORTABLE_RUNS {
            return bad(format!("runs must be >= {MIN_REPORTABLE_RUNS}, got {}", self.runs));
        }
        if self.bins == 0 {
            return bad("bins must be >= 1".into());
        }
        Ok(())
    }

    /// Ownship and true target positions at the two sample times.
    pub fn geometry(&self) -> Result<TwoPointGeometry> {
        let own = [
            Position::ORIGIN,
            propagate(Position::ORIGIN, self.ownship_course, self.ownship_speed, self.ts),
        ];
        let t0 = initial_target_position(own[0], self.b0, self.r0)?;
        let target = [t0, propagate(t0, self.target_course, self.target_speed, self.ts)];
        Ok(TwoPointGeometry { own, target })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointGeometry {
    pub own: [Position; 2],
    pub target: [Position; 2],
}

/// One noisy segment length, meters. Deterministic in `(config, seed)`.
pub fn segment_sample(config: &BiasConfig, seed: u64) -> Result<f64> {
    let g = config.geometry()?;
    let mut rng = rng::stream(seed);
    let mut points = [Position::ORIGIN; 2];
    for (k, point) in points.iter_mut().enumerate() {
        let truth = bearing_of(g.own[k], g.target[k])?;
        let z: f64 = StandardNormal.sample(&mut rng);
        let noisy = BearingDeg::new(truth.degrees() + config.noise_sigma * z);
        *point = match config.transform {
            Transform::TrueRange => initial_target_position(g.own[k], noisy, g.own[k].distance(&g.target[k]))?,
            Transform::TrackIntersection => {
                intersect_bearing_with_track(g.own[k], noisy, g.target[0], config.target_course)
                    .map_err(|_| Error::RejectedDraw)?
            }
        };
    }
    Ok(points[0].distance(&points[1]))
}

/// Equal-width histogram over `[0, upper)` plus one overflow bin `[upper, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` finite edges; the overflow bin has no upper edge.
    pub edges: Vec<f64>,
    /// `bins + 1` counts; the last is the overflow bin.
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(samples: &[f64], bins: usize, upper: f64) -> Self {
        let width = upper / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins + 1];
        for &x in samples {
            let i = (x / width).floor();
            let idx = if i >= 0.0 && i < bins as f64 { i as usize } else { bins };
            counts[idx] += 1;
        }
        Self { edges, counts }
    }

    /// `(lo, hi, count)` rows; the overflow row has `hi = inf`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        let bins = self.edges.len() - 1;
        self.counts.iter().enumerate().map(move |(i, &c)| {
            if i < bins {
                (self.edges[i], self.edges[i + 1], c)
            } else {
                (self.edges[bins], f64::INFINITY, c)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub runs_kept: usize,
    pub runs_rejected: usize,
    pub mean: f64,
    pub std: f64,
    pub kurtosis: f64,
    pub histogram: Histogram,
    /// More than 1% of draws were rejected.
    pub geometry_warning: bool,
}

/// Collects `config.runs` accepted segment samples and summarizes them.
///
/// Draw `i` uses `derive_seed(seed, i)`; rejected draws are skipped and
/// counted. Samples are buffered in draw order before any moment is taken, so
/// the report does not depend on how draws were scheduled.
pub fn bias_experiment(config: &BiasConfig, seed: u64) -> Result<BiasReport> {
    config.validate()?;
    let (samples, rejected) = collect_samples(config, seed)?;
    let m = Moments::of(&samples)?;
    let upper = m.mean + HIST_SPAN_SIGMAS * m.std;
    let drawn = samples.len() + rejected;
    Ok(BiasReport {
        runs_kept: samples.len(),
        runs_rejected: rejected,
        mean: m.mean,
        std: m.std,
        kurtosis: m.kurtosis,
        histogram: Histogram::build(&samples, config.bins, upper),
        geometry_warning: rejected as f64 > REJECT_WARN_FRACTION * drawn as f64,
    })
}

fn collect_samples(config: &BiasConfig, seed: u64) -> Result<(Vec<f64>, usize)> {
    let max_draws = config.runs.saturating_mul(100);
    let mut samples = Vec::with_capacity(config.runs);
    let mut next = 0usize;
    let mut rejected = 0usize;
    while samples.len() < config.runs {
        if next >= max_draws {
            return Err(Error::RejectedDraw);
        }
        let batch = (config.runs - samples.len()).min(max_draws - next);
        let drawn: Vec<Result<f64>> = (next..next + batch)
            .into_par_iter()
            .map(|i| segment_sample(config, derive_seed(seed, i as u64)))
            .collect();
        next += batch;
        for d in drawn {
            match d {
                Ok(x) => samples.push(x),
                Err(Error::RejectedDraw) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((samples, rejected))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub r0: f64,
    pub report: std::result::Result<BiasReport, Error>,
}

/// One [`bias_experiment`] per initial range, point `i` seeded with
/// `derive_seed(seed, i)`. A failing point is recorded, not fatal.
pub fn range_sweep(config: &BiasConfig, r0_values: &[f64], seed: u64) -> Result<Vec<SweepPoint>> {
    if r0_values.is_empty() {
        return Err(Error::InvalidConfig("range sweep needs at least one r0".into()));
    }
    Ok(r0_values
        .iter()
        .enumerate()
        .map(|(i, &r0)| SweepPoint {
            r0,
            report: bias_experiment(&config.with_r0(r0), derive_seed(seed, i as u64)),
        })
        .collect())
}
