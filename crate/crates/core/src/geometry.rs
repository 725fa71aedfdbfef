//! Points in the simulation plane (with an optional third axis).

use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// A position in meters. `z` is zero for planar scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn planar(x: T, y: T) -> Self {
        Self { x, y, z: T::zero() }
    }

    pub fn distance_squared(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(&self, other: &Self) -> T {
        self.distance_squared(other).sqrt()
    }

    /// Linear interpolation, `frac` in `[0, 1]`.
    pub fn lerp(&self, other: &Self, frac: T) -> Self {
        Self {
            x: self.x + (other.x - self.x) * frac,
            y: self.y + (other.y - self.y) * frac,
            z: self.z + (other.z - self.z) * frac,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_euclidean() {
        let a = Point::<f64>::planar(0.0, 0.0);
        let b = Point::planar(3.0, 4.0);
        assert_eq!(a.distance(&b), 5.0);
        let c = Point::<f32>::new(1.0, 2.0, 2.0);
        assert_eq!(Point::default().distance(&c), 3.0);
    }

    #[test]
    fn lerp_endpoints() {
        let a = Point::<f64>::planar(0.0, 0.0);
        let b = Point::planar(100.0, 0.0);
        assert_eq!(a.lerp(&b, 0.0), a);
        assert_eq!(a.lerp(&b, 1.0), b);
        assert_eq!(a.lerp(&b, 0.25), Point::planar(25.0, 0.0));
    }
}
