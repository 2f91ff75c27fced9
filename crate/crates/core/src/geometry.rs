//! Planar kinematics on an East/North grid.
//!
//! Angles are carried in degrees, clockwise from North (the positive y
//! axis), and converted to radians only for trigonometry. A unit vector for
//! direction `θ` is therefore `(sin θ, cos θ)`.

use std::fmt;
use std::ops::Sub;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold on `|sin(bearing - course)|` below which a bearing line and a
/// track line are treated as parallel.
pub const EPS_PARALLEL: f64 = 1e-6;

/// Reduce an angle in degrees to `[0, 360)`.
#[inline]
pub fn wrap_360(deg: f64) -> f64 {
    // one-turn fast paths give the same bits as rem_euclid
    let r = if (0.0..360.0).contains(&deg) {
        deg
    } else if (-360.0..0.0).contains(&deg) {
        deg + 360.0
    } else {
        deg.rem_euclid(360.0)
    };
    // tiny negatives round up to exactly 360.0
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Reduce an angle difference in degrees to `(-180, 180]`.
#[inline]
pub fn wrap_180(deg: f64) -> f64 {
    let r = wrap_360(deg);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Position in meters; `x` points East, `y` points North.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Position after moving with velocity `v` for `t` seconds.
    pub fn advanced(self, v: Velocity, t: f64) -> Position {
        Position::new(self.x + v.vx * t, self.y + v.vy * t)
    }
}

impl Sub for Position {
    type Output = (f64, f64);

    fn sub(self, rhs: Position) -> (f64, f64) {
        (self.x - rhs.x, self.y - rhs.y)
    }
}

/// Velocity in m/s, East and North components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub fn from_course_speed(course: CourseDeg, speed: f64) -> Self {
        let (s, c) = course.radians().sin_cos();
        Self {
            vx: speed * s,
            vy: speed * c,
        }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

macro_rules! compass_angle {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(from = "f64", into = "f64")]
        pub struct $name(f64);

        impl $name {
            /// Canonicalizes `deg` into `[0, 360)`.
            pub fn new(deg: f64) -> Self {
                Self(wrap_360(deg))
            }

            pub fn degrees(self) -> f64 {
                self.0
            }

            pub fn radians(self) -> f64 {
                self.0.to_radians()
            }

            /// `(sin, cos)` of the angle, i.e. the East/North unit vector.
            pub fn unit(self) -> (f64, f64) {
                self.radians().sin_cos()
            }
        }

        impl From<f64> for $name {
            fn from(deg: f64) -> Self {
                Self::new(deg)
            }
        }

        impl From<$name> for f64 {
            fn from(a: $name) -> f64 {
                a.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}°", self.0)
            }
        }
    };
}

compass_angle!(
    /// Line-of-sight angle from an observer, degrees clockwise from North.
    BearingDeg
);
compass_angle!(
    /// Heading of a platform, degrees clockwise from North.
    CourseDeg
);

/// Bearing from `observer` to `target`.
pub fn bearing_of(observer: Position, target: Position) -> Result<BearingDeg> {
    let (dx, dy) = target - observer;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(BearingDeg::new(dx.atan2(dy).to_degrees()))
}

/// Target position `r0` meters from `ownship0` along bearing `b0`.
pub fn initial_target_position(ownship0: Position, b0: BearingDeg, r0: f64) -> Result<Position> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidRange(r0));
    }
    let (s, c) = b0.unit();
    Ok(Position::new(ownship0.x + r0 * s, ownship0.y + r0 * c))
}

/// Constant-velocity displacement of `p0` after `t` seconds.
pub fn propagate(p0: Position, course: CourseDeg, speed: f64, t: f64) -> Position {
    debug_assert!(speed >= 0.0 && t >= 0.0);
    propagate_unit(p0, course.unit(), speed, t)
}

/// [`propagate`] with the course already resolved to its `(sin, cos)` pair.
#[inline]
pub(crate) fn propagate_unit(p0: Position, (s, c): (f64, f64), speed: f64, t: f64) -> Position {
    let dist = speed * t;
    Position::new(p0.x + dist * s, p0.y + dist * c)
}

/// Signed distance along the track (from `track_point`, in the direction of
/// `track_course`) at which the bearing line through `ray_origin` crosses it.
pub fn track_crossing_offset(
    ray_origin: Position,
    bearing: BearingDeg,
    track_point: Position,
    track_course: CourseDeg,
) -> Result<f64> {
    let (ux, uy) = bearing.unit();
    let (dx, dy) = track_course.unit();
    // u × d = sin(B - C)
    let denom = ux * dy - uy * dx;
    if denom.abs() < EPS_PARALLEL {
        return Err(Error::NearParallel(denom.abs()));
    }
    let (wx, wy) = ray_origin - track_point;
    Ok((ux * wy - uy * wx) / denom)
}

/// Intersection of the (infinite) bearing line through `ray_origin` with the
/// (infinite) track line through `track_point` heading `track_course`.
pub fn intersect_bearing_with_track(
    ray_origin: Position,
    bearing: BearingDeg,
    track_point: Position,
    track_course: CourseDeg,
) -> Result<Position> {
    let s = track_crossing_offset(ray_origin, bearing, track_point, track_course)?;
    let (dx, dy) = track_course.unit();
    Ok(Position::new(track_point.x + s * dx, track_point.y + s * dy))
}
