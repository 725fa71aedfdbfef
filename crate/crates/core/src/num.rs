//! Scalar abstraction shared by the geometric and statistical kernels.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real number type usable for coordinates, distances and statistics.
///
/// Implemented for `f32` and `f64`. The event engine itself always keeps time
/// in `f64` seconds; this trait covers the pure kernels (positions, UDG
/// adjacency, trace parsing, summary statistics) that are independent of the
/// clock.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Default + Send + Sync + 'static
{
    /// Converts from `f64`, rounding as the target type requires.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to every Scalar")
    }

    /// Lossy conversion of a count.
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize converts to every Scalar")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
