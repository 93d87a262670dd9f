//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerances throughout the crate are written as double-precision nominal
/// values and converted through [`Real::tol`], which widens them by
/// `TOL_SCALE` for lower-precision types.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + LowerExp
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Multiplier applied to nominal (f64) tolerances.
    const TOL_SCALE: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a nominal double-precision tolerance for this scalar type.
    #[inline]
    fn tol(nominal: f64) -> Self {
        Self::lit(nominal * Self::TOL_SCALE)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_SCALE: f64 = 1.0;
}

impl Real for f32 {
    const TOL_SCALE: f64 = 1e7;
}
