//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the oscillator math is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// docs assume `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal; panics only if the literal is not representable,
    /// which cannot happen for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `1 - tanh(x)^2` evaluated as `sech(x)^2`, which keeps full relative
/// precision where `tanh(x)` has already rounded to ±1.
#[inline]
pub fn sech2<T: Scalar>(x: T) -> T {
    let c = x.cosh();
    let s = c.recip();
    s * s
}

/// Inverse hyperbolic tangent with the argument pulled inside
/// `[-(1 - 1e-15), 1 - 1e-15]` first, so rounding at the edge of the open
/// interval yields a large finite value instead of infinity.
#[inline]
pub fn guarded_atanh<T: Scalar>(x: T) -> T {
    let lim = T::one() - T::lit(1e-15).max(T::epsilon());
    x.max(-lim).min(lim).atanh()
}

pub(crate) fn all_finite<T: Scalar>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}
