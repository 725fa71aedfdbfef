//! Random Waypoint movement.

use super::{MobilityError, Trajectory, Waypoint};
use crate::engine::RngStream;
use crate::geometry::Point;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpConfig<T> {
    pub width: T,
    pub height: T,
    pub v_min: T,
    pub v_max: T,
    pub pause: T,
}

impl<T: Scalar> RwpConfig<T> {
    /// Walking speeds in [1, 2] m/s with half-hour pauses, matching the
    /// speed and pause of [`SwimConfig::clustered`](super::SwimConfig::clustered).
    pub fn walking(width: T, height: T) -> Self {
        Self {
            width,
            height,
            v_min: T::of(1.0),
            v_max: T::of(2.0),
            pause: T::of(1800.0),
        }
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        let bad = |msg: &str| Err(MobilityError::InvalidConfig(msg.to_string()));
        if !(self.width > T::zero() && self.height > T::zero()) {
            return bad("rwp area dimensions must be positive");
        }
        if !(self.v_min > T::zero() && self.v_min <= self.v_max && self.v_max.is_finite()) {
            return bad("rwp speeds must satisfy 0 < v_min <= v_max");
        }
        if !(self.pause >= T::zero() && self.pause.is_finite()) {
            return bad("rwp pause must be >= 0");
        }
        Ok(())
    }
}

/// Generates one node's Random Waypoint trajectory covering `[0, horizon]`.
///
/// The node starts at a uniform random point, then repeatedly picks a uniform
/// destination and a uniform speed in `[v_min, v_max]`. A positive pause is
/// represented by a second waypoint at the same position.
pub fn rwp_generate<T: Scalar>(
    cfg: &RwpConfig<T>,
    horizon: T,
    rng: &mut RngStream,
) -> Result<Trajectory<T>, MobilityError> {
    cfg.validate()?;
    let uniform_point = |rng: &mut RngStream| {
        Point::planar(
            T::of(rng.unit()) * cfg.width,
            T::of(rng.unit()) * cfg.height,
        )
    };
    let mut t = T::zero();
    let mut pos = uniform_point(rng);
    let mut wps = vec![Waypoint { t, pos }];
    while t < horizon {
        let dest = uniform_point(rng);
        let speed = cfg.v_min + (cfg.v_max - cfg.v_min) * T::of(rng.unit());
        let dist = pos.distance(&dest);
        let travel = dist / speed;
        let arrive = t + travel;
        if !(arrive > t) {
            // zero-length leg (or travel below time resolution); redraw
            continue;
        }
        wps.push(Waypoint {
            t: arrive,
            pos: dest,
        });
        t = arrive;
        pos = dest;
        if cfg.pause > T::zero() {
            let resume = t + cfg.pause;
            if resume > t {
                wps.push(Waypoint { t: resume, pos });
                t = resume;
            }
        }
    }
    Trajectory::new(wps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Purpose;

    fn cfg(v_min: f64, v_max: f64, pause: f64) -> RwpConfig<f64> {
        RwpConfig {
            width: 100.0,
            height: 100.0,
            v_min,
            v_max,
            pause,
        }
    }

    #[test]
    fn unit_speed_legs() {
        let mut rng = RngStream::new(3, Purpose::Mobility);
        let tr = rwp_generate(&cfg(1.0, 1.0, 0.0), 5000.0, &mut rng).unwrap();
        assert!(tr.waypoints().len() > 10);
        for s in tr.leg_speeds() {
            assert!((s - 1.0).abs() < 1e-9, "speed {s}");
        }
    }

    #[test]
    fn no_pause_means_no_zero_displacement() {
        let mut rng = RngStream::new(4, Purpose::Mobility);
        let tr = rwp_generate(&cfg(0.5, 2.0, 0.0), 5000.0, &mut rng).unwrap();
        for w in tr.waypoints().windows(2) {
            assert!(w[0].pos != w[1].pos);
        }
    }

    #[test]
    fn pause_inserts_duplicate_position() {
        let mut rng = RngStream::new(5, Purpose::Mobility);
        let tr = rwp_generate(&cfg(0.5, 2.0, 30.0), 2000.0, &mut rng).unwrap();
        let w = tr.waypoints();
        assert_eq!(w[1].pos, w[2].pos);
        assert!((w[2].t - w[1].t - 30.0).abs() < 1e-9);
        assert!(tr.end_time() >= 2000.0);
    }

    #[test]
    fn invalid_configs() {
        let mut rng = RngStream::new(0, Purpose::Mobility);
        for c in [cfg(0.0, 1.0, 0.0), cfg(2.0, 1.0, 0.0), cfg(1.0, 1.0, -1.0)] {
            assert!(matches!(
                rwp_generate(&c, 10.0, &mut rng),
                Err(MobilityError::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let c = RwpConfig::<f32> {
            width: 50.0,
            height: 20.0,
            v_min: 1.0,
            v_max: 3.0,
            pause: 0.0,
        };
        let mut rng = RngStream::new(8, Purpose::Mobility);
        let tr = rwp_generate(&c, 500.0f32, &mut rng).unwrap();
        for w in tr.waypoints() {
            assert!((0.0..=50.0).contains(&w.pos.x) && (0.0..=20.0).contains(&w.pos.y));
        }
    }
}
