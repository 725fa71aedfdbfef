use serde::{Deserialize, Serialize};

use super::MobilityError;
use crate::geometry::Point;
use crate::num::Scalar;

/// A timed position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint<T> {
    pub t: T,
    pub pos: Point<T>,
}

impl<T: Scalar> Waypoint<T> {
    pub fn new(t: T, x: T, y: T, z: T) -> Self {
        Self {
            t,
            pos: Point::new(x, y, z),
        }
    }

    pub fn planar(t: T, x: T, y: T) -> Self {
        Self::new(t, x, y, T::zero())
    }
}

/// Piecewise-linear movement of one node.
///
/// Times are strictly increasing. Queries before the first waypoint or after
/// the last one clamp to the terminal positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    waypoints: Vec<Waypoint<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(waypoints: Vec<Waypoint<T>>) -> Result<Self, MobilityError> {
        if waypoints.is_empty() {
            return Err(MobilityError::EmptyTrajectory);
        }
        if let Some(i) = waypoints.windows(2).position(|w| !(w[1].t > w[0].t)) {
            return Err(MobilityError::NonMonotoneTime {
                line: 0,
                token: i + 1,
            });
        }
        Ok(Self { waypoints })
    }

    /// A node that never moves.
    pub fn stationary(pos: Point<T>) -> Self {
        Self {
            waypoints: vec![Waypoint { t: T::zero(), pos }],
        }
    }

    pub fn waypoints(&self) -> &[Waypoint<T>] {
        &self.waypoints
    }

    pub fn start_time(&self) -> T {
        self.waypoints[0].t
    }

    pub fn end_time(&self) -> T {
        self.waypoints[self.waypoints.len() - 1].t
    }

    pub fn position_at(&self, t: T) -> Point<T> {
        // index of the first waypoint strictly after t
        let after = self.waypoints.partition_point(|w| w.t <= t);
        self.interpolate(after, t)
    }

    /// Same as [`position_at`](Self::position_at), reusing `cursor` from a
    /// previous call. Amortized O(1) when queries move forward in time.
    pub fn position_at_from(&self, t: T, cursor: &mut usize) -> Point<T> {
        let n = self.waypoints.len();
        let mut after = (*cursor).min(n);
        if after > 0 && self.waypoints[after - 1].t > t {
            after = self.waypoints.partition_point(|w| w.t <= t);
        } else {
            while after < n && self.waypoints[after].t <= t {
                after += 1;
            }
        }
        *cursor = after;
        self.interpolate(after, t)
    }

    fn interpolate(&self, after: usize, t: T) -> Point<T> {
        let n = self.waypoints.len();
        if after == 0 {
            return self.waypoints[0].pos;
        }
        if after == n {
            return self.waypoints[n - 1].pos;
        }
        let a = &self.waypoints[after - 1];
        let b = &self.waypoints[after];
        let frac = (t - a.t) / (b.t - a.t);
        let p = a.pos.lerp(&b.pos, frac);
        // keep rounding from stepping outside the segment's bounding box
        Point {
            x: clamp_between(p.x, a.pos.x, b.pos.x),
            y: clamp_between(p.y, a.pos.y, b.pos.y),
            z: clamp_between(p.z, a.pos.z, b.pos.z),
        }
    }

    /// Speed implied by each consecutive waypoint pair.
    pub fn leg_speeds(&self) -> impl Iterator<Item = T> + '_ {
        self.waypoints
            .windows(2)
            .map(|w| w[0].pos.distance(&w[1].pos) / (w[1].t - w[0].t))
    }
}

fn clamp_between<T: Scalar>(v: T, a: T, b: T) -> T {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    v.max(lo).min(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Trajectory<f64> {
        Trajectory::new(vec![
            Waypoint::planar(0.0, 0.0, 0.0),
            Waypoint::planar(10.0, 100.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn interpolates_linearly() {
        assert_eq!(line().position_at(2.5), Point::new(25.0, 0.0, 0.0));
    }

    #[test]
    fn clamps_outside_span() {
        let tr = line();
        assert_eq!(tr.position_at(-3.0), Point::planar(0.0, 0.0));
        assert_eq!(tr.position_at(99.0), Point::planar(100.0, 0.0));
    }

    #[test]
    fn cursor_matches_binary_search() {
        let tr = Trajectory::new(
            (0..50)
                .map(|i| Waypoint::planar(i as f64 * 2.0, (i * i % 17) as f64, (i % 5) as f64))
                .collect(),
        )
        .unwrap();
        let mut cursor = 0;
        let mut t = -1.0;
        while t < 110.0 {
            assert_eq!(tr.position_at_from(t, &mut cursor), tr.position_at(t));
            t += 0.37;
        }
        // going backwards still works
        assert_eq!(tr.position_at_from(3.3, &mut cursor), tr.position_at(3.3));
    }

    #[test]
    fn continuity_at_segment_boundaries() {
        let tr = Trajectory::new(vec![
            Waypoint::planar(0.0, 0.0, 0.0),
            Waypoint::planar(10.0, 10.0, 0.0),
            Waypoint::planar(20.0, 10.0, 10.0),
        ])
        .unwrap();
        for &b in &[10.0f64, 20.0] {
            let eps = 1e-9;
            let d = tr.position_at(b - eps).distance(&tr.position_at(b + eps));
            assert!(d < 1e-6);
        }
    }

    #[test]
    fn rejects_repeated_time() {
        let e = Trajectory::new(vec![
            Waypoint::planar(0.0f32, 0.0, 0.0),
            Waypoint::planar(0.0, 5.0, 5.0),
        ]);
        assert!(matches!(e, Err(MobilityError::NonMonotoneTime { .. })));
    }
}
