//! The two batch cost functions for candidate target tracks.
//!
//! * Equidistant line segments: a constant-velocity target is cut into
//!   equal-length pieces by bearing lines sampled at a constant interval. The
//!   cost is the summed absolute deviation of the segment lengths from their
//!   mean, normalized by the mean. It depends on initial range and course only;
//!   speed follows from the intersections.
//! * Bearing differences: the root of the summed squared residuals between
//!   measured bearings and the bearings a candidate `(r0, course, speed)`
//!   would produce.

use crate::error::{Error, Result};
use crate::geometry::{
    bearing_of, initial_target_position, intersect_bearing_with_track, propagate_unit, wrap_180, BearingDeg,
    CourseDeg, Position,
};
use crate::scenario::{BearingSeries, Scenario, TargetParams};

/// Mean segment lengths below this (meters) mark a collapsed candidate.
pub const EPS_DIST: f64 = 1e-3;

/// Straight-line candidate used by the equidistant cost. Speed is not part of
/// the candidate; it is recovered from the segment lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateTrack {
    pub r0: f64,
    pub course: CourseDeg,
}

impl CandidateTrack {
    pub fn new(r0: f64, course: f64) -> Self {
        Self {
            r0,
            course: CourseDeg::new(course),
        }
    }
}

/// Where the bearing lines cut a candidate track, and the segment lengths
/// between consecutive cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStats {
    pub intersection_points: Vec<Position>,
    pub segment_lengths: Vec<f64>,
    pub d_mean: f64,
}

impl SegmentStats {
    /// Builds the stats from intersection points already on a track line.
    pub fn from_points(points: Vec<Position>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InsufficientSamples {
                need: 2,
                got: points.len(),
            });
        }
        let segment_lengths: Vec<f64> = points.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let d_mean = segment_lengths.iter().sum::<f64>() / segment_lengths.len() as f64;
        Ok(Self {
            intersection_points: points,
            segment_lengths,
            d_mean,
        })
    }
}

/// Intersects every measured bearing line with the candidate track.
///
/// The track passes through the point `candidate.r0` meters from
/// `ownship_start` along `anchor` and heads `candidate.course`.
pub fn segment_stats(
    series: &BearingSeries,
    candidate: CandidateTrack,
    ownship_start: Position,
    anchor: BearingDeg,
) -> Result<SegmentStats> {
    if series.len() < 3 {
        return Err(Error::InsufficientSamples {
            need: 3,
            got: series.len(),
        });
    }
    let origin = initial_target_position(ownship_start, anchor, candidate.r0)?;
    let points = series
        .ownship_positions
        .iter()
        .zip(&series.measured_bearings)
        .enumerate()
        .map(|(k, (&own, &b))| {
            intersect_bearing_with_track(own, b, origin, candidate.course).map_err(|_| Error::SingularCandidate(k))
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = SegmentStats::from_points(points)?;
    if !(stats.d_mean >= EPS_DIST) {
        return Err(Error::DegenerateTrack(stats.d_mean));
    }
    Ok(stats)
}

/// Summed absolute normalized deviation of the segment lengths from their mean.
pub fn cost_equidistant(stats: &SegmentStats) -> Result<f64> {
    let m = stats.d_mean;
    if !(m >= EPS_DIST) {
        return Err(Error::DegenerateTrack(m));
    }
    Ok(stats.segment_lengths.iter().map(|d| ((d - m) / m).abs()).sum())
}

/// Target speed implied by the intersections: distance from the first to the
/// last cut over the elapsed time `(n - 1) * ts`.
///
/// For cuts that advance monotonically along the track this is the summed
/// segment length over the elapsed time, i.e. `d_mean / ts`.
pub fn derive_speed(stats: &SegmentStats, ts: f64) -> f64 {
    let pts = &stats.intersection_points;
    let n = pts.len();
    debug_assert!(n >= 2 && ts > 0.0);
    pts[0].distance(&pts[n - 1]) / ((n - 1) as f64 * ts)
}

/// Root of the summed squared bearing residuals, degrees. Each residual is
/// wrapped to `(-180, 180]` before squaring.
pub fn cost_bearing_diff(measured: &[BearingDeg], estimated: &[BearingDeg]) -> Result<f64> {
    if measured.len() != estimated.len() {
        return Err(Error::ShapeError {
            left: measured.len(),
            right: estimated.len(),
        });
    }
    if measured.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let sum: f64 = measured
        .iter()
        .zip(estimated)
        .map(|(m, e)| {
            let d = wrap_180(m.degrees() - e.degrees());
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Bearings from the scenario's ownship track to the candidate target
/// `params`, whose start point lies on `anchor` from the ownship start.
pub fn predicted_bearings(params: &TargetParams, scenario: &Scenario, anchor: BearingDeg) -> Result<Vec<BearingDeg>> {
    let origin = initial_target_position(scenario.ownship_start, anchor, params.r0)?;
    let dir = params.course.unit();
    scenario
        .sample_times()
        .into_iter()
        .map(|t| {
            let own = scenario.ownship_position_at(t)?;
            bearing_of(own, propagate_unit(origin, dir, params.speed, t))
        })
        .collect()
}

/// Bearing-difference cost evaluator specialized for a fixed measurement
/// series, for use inside grid searches. Produces exactly the value of
/// `cost_bearing_diff(measured, predicted_bearings(..))`.
pub(crate) struct BearingDiffKernel<'a> {
    times: &'a [f64],
    ownship: &'a [Position],
    measured: &'a [BearingDeg],
}

impl<'a> BearingDiffKernel<'a> {
    pub(crate) fn new(series: &'a BearingSeries) -> Self {
        Self {
            times: &series.times,
            ownship: &series.ownship_positions,
            measured: &series.measured_bearings,
        }
    }

    /// Cost of a target leaving `origin` along unit vector `dir` at `speed`.
    /// A candidate passing exactly through the ownship costs `+inf`.
    pub(crate) fn cost(&self, origin: Position, dir: (f64, f64), speed: f64) -> f64 {
        let mut sum = 0.0;
        for ((&t, &own), m) in self.times.iter().zip(self.ownship).zip(self.measured) {
            let tgt = propagate_unit(origin, dir, speed, t);
            let Ok(e) = bearing_of(own, tgt) else {
                return f64::INFINITY;
            };
            let d = wrap_180(m.degrees() - e.degrees());
            sum += d * d;
        }
        sum.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::propagate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn b(v: &[f64]) -> Vec<BearingDeg> {
        v.iter().copied().map(BearingDeg::new).collect()
    }

    fn collinear(lengths: &[f64]) -> SegmentStats {
        let mut pts = vec![Position::new(10.0, -4.0)];
        for d in lengths {
            let last = *pts.last().unwrap();
            pts.push(propagate(last, CourseDeg::new(30.0), *d, 1.0));
        }
        SegmentStats::from_points(pts).unwrap()
    }

    fn scenario1(ct: f64) -> Scenario {
        Scenario::two_leg(45.0, TargetParams::new(5000.0, ct, 5.0), 100.0)
    }

    #[test]
    fn bearing_diff_hand_cases() {
        assert_eq!(cost_bearing_diff(&b(&[1.0, 2.0, 3.0]), &b(&[1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(cost_bearing_diff(&b(&[10.0]), &b(&[13.0])).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            cost_bearing_diff(&b(&[10.0, 20.0]), &b(&[13.0, 24.0])).unwrap(),
            5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bearing_diff_wraps_across_north() {
        assert_abs_diff_eq!(cost_bearing_diff(&b(&[359.0]), &b(&[1.0])).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bearing_diff_shape_mismatch() {
        assert_eq!(
            cost_bearing_diff(&b(&[1.0, 2.0]), &b(&[1.0])),
            Err(Error::ShapeError { left: 2, right: 1 })
        );
    }

    #[test]
    fn equidistant_hand_cases() {
        assert_abs_diff_eq!(cost_equidistant(&collinear(&[50.0; 5])).unwrap(), 0.0, epsilon = 1e-12);
        let s = collinear(&[90.0, 110.0]);
        assert_abs_diff_eq!(s.d_mean, 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cost_equidistant(&s).unwrap(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(cost_equidistant(&collinear(&[50.0, 100.0, 150.0])).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn equidistant_rejects_collapsed_track() {
        let s = collinear(&[0.0, 0.0]);
        assert!(matches!(cost_equidistant(&s), Err(Error::DegenerateTrack(_))));
    }

    #[test]
    fn speed_hand_cases() {
        assert_abs_diff_eq!(derive_speed(&collinear(&[50.0; 4]), 10.0), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(derive_speed(&collinear(&[90.0, 110.0]), 20.0), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_truth_is_a_zero_of_both_costs() {
        for ct in [30.0, 170.0] {
            let sc = scenario1(ct).with_noise(0.0);
            let series = sc.generate_bearings(1).unwrap();
            let stats = segment_stats(&series, CandidateTrack::new(5000.0, ct), sc.ownship_start, sc.b0).unwrap();
            for d in &stats.segment_lengths {
                assert_abs_diff_eq!(*d, 50.0, epsilon = 1e-6);
            }
            assert!(cost_equidistant(&stats).unwrap() < 1e-9);
            assert_abs_diff_eq!(derive_speed(&stats, sc.ts), 5.0, epsilon = 1e-6);

            let pred = predicted_bearings(&sc.target, &sc, sc.b0).unwrap();
            for (p, t) in pred.iter().zip(&series.true_bearings) {
                assert!(wrap_180(p.degrees() - t.degrees()).abs() < 1e-9);
            }
            assert!(cost_bearing_diff(&series.measured_bearings, &pred).unwrap() < 1e-9);
        }
    }

    #[test]
    fn parallel_candidate_is_singular() {
        // candidate heading straight down the first bearing line
        let sc = scenario1(30.0).with_noise(0.0);
        let series = sc.generate_bearings(1).unwrap();
        let r = segment_stats(&series, CandidateTrack::new(5000.0, 45.0), sc.ownship_start, sc.b0);
        assert_eq!(r, Err(Error::SingularCandidate(0)));
    }

    #[test]
    fn stationary_target_constant_bearings() {
        let mut sc = scenario1(0.0);
        sc.b0 = BearingDeg::new(0.0);
        sc.target.speed = 0.0;
        for leg in &mut sc.legs {
            leg.speed = 0.0;
        }
        let pred = predicted_bearings(&sc.target, &sc, sc.b0).unwrap();
        assert!(pred.iter().all(|p| *p == pred[0]));
        assert_eq!(pred[0].degrees(), 0.0);
    }

    #[test]
    fn perturbed_range_matches_direct_recomputation() {
        let sc = scenario1(30.0);
        let params = TargetParams::new(6000.0, 30.0, 5.0);
        let pred = predicted_bearings(&params, &sc, sc.b0).unwrap();
        let truth = predicted_bearings(&sc.target, &sc, sc.b0).unwrap();
        assert!(pred.iter().zip(&truth).any(|(a, b)| (a.degrees() - b.degrees()).abs() > 0.1));
        // independent per-sample recomputation in plain trigonometry
        let r = 45f64.to_radians();
        let (x0, y0) = (6000.0 * r.sin(), 6000.0 * r.cos());
        let c = 30f64.to_radians();
        for (k, p) in pred.iter().enumerate() {
            let t = k as f64 * sc.ts;
            let own = sc.ownship_position_at(t).unwrap();
            let (x, y) = (x0 + 5.0 * t * c.sin(), y0 + 5.0 * t * c.cos());
            let mut want = (x - own.x).atan2(y - own.y).to_degrees();
            if want < 0.0 {
                want += 360.0;
            }
            assert_abs_diff_eq!(p.degrees(), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn kernel_matches_public_path() {
        let sc = scenario1(170.0);
        let series = sc.generate_bearings(77).unwrap();
        let kernel = BearingDiffKernel::new(&series);
        for (r0, c, s) in [(4500.0, 168.0, 3.0), (5000.0, 170.0, 5.0), (5900.0, 171.3, 19.0)] {
            let params = TargetParams::new(r0, c, s);
            let pred = predicted_bearings(&params, &sc, sc.b0).unwrap();
            let slow = cost_bearing_diff(&series.measured_bearings, &pred).unwrap();
            let origin = initial_target_position(sc.ownship_start, sc.b0, r0).unwrap();
            assert_eq!(kernel.cost(origin, params.course.unit(), s), slow);
        }
    }

    proptest! {
        #[test]
        fn equidistant_scale_invariant(
            lengths in proptest::collection::vec(1.0..500.0f64, 2..40),
            scale in 1e-2..1e3f64,
        ) {
            let a = cost_equidistant(&collinear(&lengths)).unwrap();
            let scaled: Vec<f64> = lengths.iter().map(|d| d * scale).collect();
            let b = cost_equidistant(&collinear(&scaled)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }

        #[test]
        fn bearing_diff_invariances(
            pairs in proptest::collection::vec((0.0..360.0f64, 0.0..360.0f64), 1..30),
            turns in -3i32..3,
            seed in any::<u64>(),
        ) {
            let (m, e): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let base = cost_bearing_diff(&b(&m), &b(&e)).unwrap();
            let shift = 360.0 * turns as f64;
            let shifted = cost_bearing_diff(
                &b(&m.iter().map(|x| x + shift).collect::<Vec<_>>()),
                &b(&e.iter().map(|x| x + shift).collect::<Vec<_>>()),
            ).unwrap();
            prop_assert!((base - shifted).abs() < 1e-9);

            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            let mut s = seed;
            for i in (1..idx.len()).rev() {
                s = crate::rng::splitmix64(s);
                idx.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let pm: Vec<f64> = idx.iter().map(|&i| m[i]).collect();
            let pe: Vec<f64> = idx.iter().map(|&i| e[i]).collect();
            let permuted = cost_bearing_diff(&b(&pm), &b(&pe)).unwrap();
            prop_assert!((base - permuted).abs() < 1e-9);

            let zero = cost_bearing_diff(&b(&m), &b(&m)).unwrap();
            prop_assert_eq!(zero, 0.0);
        }
    }
}
