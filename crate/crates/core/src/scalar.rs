//! Scalar abstraction shared by every geometric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar: `f32` or `f64`.
///
/// Tolerances in this crate are stated for `f64`; `f32` builds are useful for
/// quick previews and mesh export but will not meet the 1e-12 identities.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `acos` with the argument clamped to `[-1, 1]`.
    #[inline]
    fn acos_clamped(self) -> Self {
        self.max(-Self::one()).min(Self::one()).acos()
    }

    /// `acosh` with the argument clamped to `[1, inf)`.
    #[inline]
    fn acosh_clamped(self) -> Self {
        self.max(Self::one()).acosh()
    }
}

impl Real for f32 {}
impl Real for f64 {}
