//! Engagement geometry: a constant-velocity target, a multi-leg ownship, and
//! the bearing series sampled from them.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing_of, initial_target_position, propagate, BearingDeg, CourseDeg, Position};
use crate::rng;

/// Initial range, course and speed of a constant-velocity target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetParams {
    /// meters
    pub r0: f64,
    pub course: CourseDeg,
    /// m/s
    pub speed: f64,
}

impl TargetParams {
    pub fn new(r0: f64, course: f64, speed: f64) -> Self {
        Self {
            r0,
            course: CourseDeg::new(course),
            speed,
        }
    }
}

/// One constant-course, constant-speed stretch of the ownship plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OwnshipLeg {
    pub course: CourseDeg,
    /// m/s
    pub speed: f64,
    /// seconds
    pub duration: f64,
}

impl OwnshipLeg {
    pub fn new(course: f64, speed: f64, duration: f64) -> Self {
        Self {
            course: CourseDeg::new(course),
            speed,
            duration,
        }
    }
}

/// Default sampling interval, seconds.
pub const DEFAULT_TS: f64 = 10.0;
/// Default number of bearing samples.
pub const DEFAULT_N: usize = 120;
/// Default ownship speed on both legs, m/s.
pub const DEFAULT_OWNSHIP_SPEED: f64 = 5.0;
/// Course change between the first and second ownship leg, degrees (positive
/// is a starboard turn).
pub const DEFAULT_TURN: f64 = 40.0;

/// A full experiment geometry.
///
/// The true target starts `target.r0` meters from `ownship_start` on bearing
/// `b0` and moves at constant velocity. Bearings are sampled at `k * ts` for
/// `k = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub b0: BearingDeg,
    pub target: TargetParams,
    #[serde(default)]
    pub ownship_start: Position,
    pub legs: Vec<OwnshipLeg>,
    pub ts: f64,
    pub n: usize,
    /// Standard deviation of the additive bearing noise, degrees.
    pub noise_sigma: f64,
}

impl Scenario {
    /// Two equal-duration legs covering the sampling window: the first at
    /// `ownship_course`, the second turned by [`DEFAULT_TURN`].
    pub fn two_leg(b0: f64, target: TargetParams, ownship_course: f64) -> Self {
        let half = (DEFAULT_N - 1) as f64 * DEFAULT_TS / 2.0;
        Self {
            b0: BearingDeg::new(b0),
            target,
            ownship_start: Position::ORIGIN,
            legs: vec![
                OwnshipLeg::new(ownship_course, DEFAULT_OWNSHIP_SPEED, half),
                OwnshipLeg::new(ownship_course + DEFAULT_TURN, DEFAULT_OWNSHIP_SPEED, half),
            ],
            ts: DEFAULT_TS,
            n: DEFAULT_N,
            noise_sigma: 1.0,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.target.r0 > 0.0) || !self.target.r0.is_finite() {
            return bad(format!("target.r0 must be > 0, got {}", self.target.r0));
        }
        if !(self.target.speed >= 0.0) || !self.target.speed.is_finite() {
            return bad(format!("target.speed must be >= 0, got {}", self.target.speed));
        }
        if !self.ownship_start.is_finite() {
            return bad("ownship_start must be finite".into());
        }
        if self.n < 3 {
            return bad(format!("n must be >= 3, got {}", self.n));
        }
        if !(self.ts > 0.0) || !self.ts.is_finite() {
            return bad(format!("ts must be > 0, got {}", self.ts));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.legs.is_empty() {
            return bad("at least one ownship leg is required".into());
        }
        for (i, leg) in self.legs.iter().enumerate() {
            if !(leg.duration > 0.0) || !leg.duration.is_finite() {
                return bad(format!("legs[{i}].duration must be > 0, got {}", leg.duration));
            }
            if !(leg.speed >= 0.0) || !leg.speed.is_finite() {
                return bad(format!("legs[{i}].speed must be >= 0, got {}", leg.speed));
            }
        }
        let window = self.window();
        if self.total_duration() < window {
            return bad(format!(
                "legs cover {} s but sampling needs (n-1)*ts = {} s",
                self.total_duration(),
                window
            ));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.legs.iter().map(|l| l.duration).sum()
    }

    /// Length of the sampling window, `(n - 1) * ts`.
    pub fn window(&self) -> f64 {
        (self.n - 1) as f64 * self.ts
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.n).map(|k| k as f64 * self.ts).collect()
    }

    /// Ownship position at `t`, integrating the legs in order.
    pub fn ownship_position_at(&self, t: f64) -> Result<Position> {
        let end = self.total_duration();
        if !(t >= 0.0) || t > end * (1.0 + 1e-12) {
            return Err(Error::OutOfWindow { t, end });
        }
        let mut pos = self.ownship_start;
        let mut elapsed = 0.0;
        for (i, leg) in self.legs.iter().enumerate() {
            let last = i + 1 == self.legs.len();
            if t <= elapsed + leg.duration || last {
                return Ok(propagate(pos, leg.course, leg.speed, t - elapsed));
            }
            pos = propagate(pos, leg.course, leg.speed, leg.duration);
            elapsed += leg.duration;
        }
        unreachable!("validated scenarios have at least one leg")
    }

    /// True target position at the start of the engagement.
    pub fn target_origin(&self) -> Result<Position> {
        initial_target_position(self.ownship_start, self.b0, self.target.r0)
    }

    pub fn target_position_at(&self, t: f64) -> Result<Position> {
        if !(t >= 0.0) {
            return Err(Error::OutOfWindow { t, end: f64::INFINITY });
        }
        Ok(propagate(self.target_origin()?, self.target.course, self.target.speed, t))
    }

    pub fn ownship_track(&self) -> Result<Vec<Position>> {
        self.sample_times().into_iter().map(|t| self.ownship_position_at(t)).collect()
    }

    /// Samples true bearings at `k * ts` and adds `N(0, noise_sigma²)` noise.
    ///
    /// Output is a pure function of `(self, seed)`.
    pub fn generate_bearings(&self, seed: u64) -> Result<BearingSeries> {
        self.validate()?;
        let mut rng = rng::stream(seed);
        let times = self.sample_times();
        let mut true_bearings = Vec::with_capacity(self.n);
        let mut measured_bearings = Vec::with_capacity(self.n);
        let mut ownship_positions = Vec::with_capacity(self.n);
        for &t in &times {
            let own = self.ownship_position_at(t)?;
            let truth = bearing_of(own, self.target_position_at(t)?)?;
            let z: f64 = StandardNormal.sample(&mut rng);
            true_bearings.push(truth);
            measured_bearings.push(BearingDeg::new(truth.degrees() + self.noise_sigma * z));
            ownship_positions.push(own);
        }
        Ok(BearingSeries {
            times,
            true_bearings,
            measured_bearings,
            ownship_positions,
        })
    }
}

/// Bearings sampled at a fixed interval, with the ownship positions they were
/// taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingSeries {
    pub times: Vec<f64>,
    pub true_bearings: Vec<BearingDeg>,
    pub measured_bearings: Vec<BearingDeg>,
    pub ownship_positions: Vec<Position>,
}

impl BearingSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sampling_interval(&self) -> f64 {
        self.times[1] - self.times[0]
    }
}
