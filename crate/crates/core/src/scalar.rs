//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the solver is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A point or vector in the plane.
pub type Point2<T> = [T; 2];

#[inline]
pub(crate) fn dist2<T: Real>(a: Point2<T>, b: Point2<T>) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Space-time scalar function `f(x, t)`.
pub type ScalarFn<T> = std::sync::Arc<dyn Fn(Point2<T>, T) -> T + Send + Sync>;

/// Space-time vector function `u(x, t)`.
pub type VectorFn<T> = std::sync::Arc<dyn Fn(Point2<T>, T) -> Point2<T> + Send + Sync>;
