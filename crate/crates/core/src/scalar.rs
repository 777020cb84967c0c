//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating point type the geometry is computed in: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for `f64`; with `f32` the
/// routines run but most default tolerances are below its resolution.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let mut r = theta % tau;
    if r < T::zero() {
        r = r + tau;
    }
    if r >= tau {
        r = r - tau;
    }
    r
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_pi<T: Real>(theta: T) -> T {
    let r = wrap_two_pi(theta);
    if r > T::PI() {
        r - T::TAU()
    } else {
        r
    }
}
