//! Scalar abstraction shared by the numeric modules.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Floating-point type the numeric code is generic over.
///
/// Implemented for `f32` and `f64`. The decoder runs fine in `f32`; the
/// key-rate analytics want `f64` because the quantities of interest sit
/// around `1e-4` and are differences of numbers of order one.
pub trait Real:
    'static
    + Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + Send
    + Sync
    + Debug
    + Display
    + LowerExp
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
