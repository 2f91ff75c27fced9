//! Exhaustive grid search over target parameters, error metrics, and the
//! Monte Carlo harness around them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::{cost_equidistant, derive_speed, segment_stats, BearingDiffKernel, CandidateTrack};
use crate::error::{Error, Result};
use crate::geometry::{initial_target_position, propagate, wrap_180, BearingDeg, CourseDeg};
use crate::rng::derive_seed;
use crate::scenario::{BearingSeries, Scenario, TargetParams};

/// Relative tolerance under which two cell costs count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Inclusive grid `lo, lo + step, ...` keeping every value with
/// `lo + i * step <= hi + step / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name}: bounds must be finite")));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidConfig(format!("{name}: step must be > 0, got {}", self.step)));
        }
        if self.lo > self.hi {
            return Err(Error::InvalidConfig(format!("{name}: lo {} > hi {}", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let limit = self.hi + self.step / 2.0;
        (0..)
            .map(|i| self.lo + i as f64 * self.step)
            .take_while(|v| *v <= limit)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-parameter grids. Course values are raw degrees and may run past 360;
/// they are canonicalized when a candidate is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub r0: GridAxis,
    pub course: GridAxis,
    pub speed: GridAxis,
}

impl SearchSpace {
    /// Range within ±1000 m in 10 m steps, course within ±2° in 0.1° steps,
    /// speed over [1, 20] m/s in 0.1 m/s steps.
    pub fn around(truth: &TargetParams) -> Self {
        let c = truth.course.degrees();
        Self {
            r0: GridAxis::new(truth.r0 - 1000.0, truth.r0 + 1000.0, 10.0),
            course: GridAxis::new(c - 2.0, c + 2.0, 0.1),
            speed: GridAxis::new(1.0, 20.0, 0.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.r0.validate("r0")?;
        self.course.validate("course")?;
        self.speed.validate("speed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    BearingDiff,
    Equidistant,
}

impl CostKind {
    pub const ALL: [CostKind; 2] = [CostKind::BearingDiff, CostKind::Equidistant];

    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::BearingDiff => "bearing-diff",
            CostKind::Equidistant => "equidistant",
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bearing-diff" => Ok(CostKind::BearingDiff),
            "equidistant" => Ok(CostKind::Equidistant),
            _ => Err(Error::InvalidConfig(format!("unknown cost kind {s:?}"))),
        }
    }
}

/// Which bearing places a candidate's starting point: the scenario's true
/// initial bearing, or the first measured one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Anchor {
    #[default]
    TrueB0,
    MeasuredB0,
}

impl Anchor {
    pub fn bearing(self, scenario: &Scenario, series: &BearingSeries) -> BearingDeg {
        match self {
            Anchor::TrueB0 => scenario.b0,
            Anchor::MeasuredB0 => series.measured_bearings[0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Anchor::TrueB0 => "true-b0",
            Anchor::MeasuredB0 => "measured-b0",
        }
    }
}

impl FromStr for Anchor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true-b0" => Ok(Anchor::TrueB0),
            "measured-b0" => Ok(Anchor::MeasuredB0),
            _ => Err(Error::InvalidConfig(format!("unknown anchor {s:?}"))),
        }
    }
}

/// Estimated minus true parameters; course wrapped to `(-180, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ParamError {
    pub r0: f64,
    pub course: f64,
    pub speed: f64,
}

impl ParamError {
    pub fn abs(self) -> Self {
        Self {
            r0: self.r0.abs(),
            course: self.course.abs(),
            speed: self.speed.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub best: TargetParams,
    pub cost: f64,
    pub param_error: ParamError,
    pub rms_error: f64,
    pub cells_evaluated: usize,
}

pub fn param_error(truth: &TargetParams, est: &TargetParams) -> ParamError {
    ParamError {
        r0: est.r0 - truth.r0,
        course: wrap_180(est.course.degrees() - truth.course.degrees()),
        speed: est.speed - truth.speed,
    }
}

/// RMS distance, over the sample times, between the true track and the track
/// rebuilt from `est` (anchored on the scenario's true initial bearing).
pub fn rms_trajectory_error(scenario: &Scenario, est: &TargetParams) -> Result<f64> {
    let origin = initial_target_position(scenario.ownship_start, scenario.b0, est.r0)?;
    let times = scenario.sample_times();
    let mut sum = 0.0;
    for &t in &times {
        let truth = scenario.target_position_at(t)?;
        let guess = propagate(origin, est.course, est.speed, t);
        let d = truth.distance(&guess);
        sum += d * d;
    }
    Ok((sum / times.len() as f64).sqrt())
}

/// Index of the winning cell: the smallest index among cells within
/// [`TIE_RTOL`] of the exact minimum. Cells are laid out in lexicographic
/// (r0, course, speed) order, so this is independent of evaluation order.
fn argmin_with_ties(costs: &[f64]) -> Result<usize> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NoFeasibleCandidate);
    }
    let cutoff = min + TIE_RTOL * min.abs();
    Ok(costs.iter().position(|&c| c <= cutoff).expect("minimum is present"))
}

/// Exhaustive search of `space` for the parameters minimizing `kind`.
///
/// The bearing-difference cost is evaluated on every (r0, course, speed)
/// cell. The equidistant cost ignores the speed grid: it is evaluated on every
/// (r0, course) cell, and the winner's speed is derived from its segment
/// lengths (clamped into the speed axis bounds). Cells whose cost cannot be
/// evaluated count as `+inf`.
pub fn grid_search(
    scenario: &Scenario,
    series: &BearingSeries,
    space: &SearchSpace,
    kind: CostKind,
    anchor: Anchor,
) -> Result<EstimationResult> {
    space.validate()?;
    let r0s = space.r0.values();
    let courses = space.course.values();
    let speeds = space.speed.values();
    if r0s.is_empty() || courses.is_empty() || speeds.is_empty() {
        return Err(Error::EmptySearchSpace);
    }
    let anchor = anchor.bearing(scenario, series);
    let (nc, ns) = (courses.len(), speeds.len());

    let (best, cost, cells) = match kind {
        CostKind::BearingDiff => {
            let kernel = BearingDiffKernel::new(series);
            let mut costs = vec![f64::INFINITY; r0s.len() * nc * ns];
            costs.par_chunks_mut(ns).enumerate().for_each(|(ij, out)| {
                let (r0, course) = (r0s[ij / nc], CourseDeg::new(courses[ij % nc]));
                let Ok(origin) = initial_target_position(scenario.ownship_start, anchor, r0) else {
                    return;
                };
                let dir = course.unit();
                for (slot, &s) in out.iter_mut().zip(&speeds) {
                    *slot = kernel.cost(origin, dir, s);
                }
            });
            let idx = argmin_with_ties(&costs)?;
            let (ij, k) = (idx / ns, idx % ns);
            let best = TargetParams::new(r0s[ij / nc], courses[ij % nc], speeds[k]);
            (best, costs[idx], costs.len())
        }
        CostKind::Equidistant => {
            let candidate = |ij: usize| CandidateTrack::new(r0s[ij / nc], courses[ij % nc]);
            let costs: Vec<f64> = (0..r0s.len() * nc)
                .into_par_iter()
                .map(|ij| {
                    segment_stats(series, candidate(ij), scenario.ownship_start, anchor)
                        .and_then(|st| cost_equidistant(&st))
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            let idx = argmin_with_ties(&costs)?;
            let track = candidate(idx);
            let stats = segment_stats(series, track, scenario.ownship_start, anchor)?;
            let speed = derive_speed(&stats, series.sampling_interval()).clamp(space.speed.lo, space.speed.hi);
            let best = TargetParams {
                r0: track.r0,
                course: track.course,
                speed,
            };
            (best, costs[idx], costs.len())
        }
    };

    Ok(EstimationResult {
        param_error: param_error(&scenario.target, &best),
        rms_error: rms_trajectory_error(scenario, &best)?,
        best,
        cost,
        cells_evaluated: cells,
    })
}

/// One Monte Carlo run: its seed and either a result or the error that ended it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub index: usize,
    pub seed: u64,
    pub result: std::result::Result<EstimationResult, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub kind: CostKind,
    pub runs: usize,
    /// Runs that ended in an error; excluded from the means.
    pub failed: usize,
    /// Mean absolute parameter error over successful runs.
    pub mean_param_error: ParamError,
    pub mean_rms_error: f64,
    pub per_run: Vec<RunOutcome>,
}

impl MonteCarloSummary {
    pub fn from_runs(kind: CostKind, per_run: Vec<RunOutcome>) -> Self {
        let ok: Vec<&EstimationResult> = per_run.iter().filter_map(|r| r.result.as_ref().ok()).collect();
        let n = ok.len() as f64;
        let (mut pe, mut rms) = (ParamError::default(), 0.0);
        for r in &ok {
            let a = r.param_error.abs();
            pe.r0 += a.r0;
            pe.course += a.course;
            pe.speed += a.speed;
            rms += r.rms_error;
        }
        let mean = |x: f64| if ok.is_empty() { f64::NAN } else { x / n };
        Self {
            kind,
            runs: per_run.len(),
            failed: per_run.len() - ok.len(),
            mean_param_error: ParamError {
                r0: mean(pe.r0),
                course: mean(pe.course),
                speed: mean(pe.speed),
            },
            mean_rms_error: mean(rms),
            per_run,
        }
    }
}

/// `runs` independent noisy realizations of `scenario`, each estimated by
/// [`grid_search`]. Run `i` draws its bearings with `derive_seed(base_seed, i)`.
pub fn monte_carlo(
    scenario: &Scenario,
    space: &SearchSpace,
    kind: CostKind,
    anchor: Anchor,
    runs: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    scenario.validate()?;
    space.validate()?;
    let per_run: Vec<RunOutcome> = (0..runs)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(base_seed, index as u64);
            let result = scenario
                .generate_bearings(seed)
                .and_then(|series| grid_search(scenario, &series, space, kind, anchor));
            RunOutcome { index, seed, result }
        })
        .collect();
    Ok(MonteCarloSummary::from_runs(kind, per_run))
}
