use num_traits::{Float as NumFloat, FloatConst, FromPrimitive};

/// Floating-point scalar for the statistical kernels.
///
/// Implemented by `f32` and `f64`; the pipeline itself runs on the crate's
/// [`Real`](crate::Real) alias. Bound as a blanket impl so downstream float
/// types satisfying the arithmetic traits work without an explicit opt-in.
pub trait Float:
    NumFloat + FloatConst + FromPrimitive + core::ops::AddAssign + core::fmt::Debug
{
}

impl<T> Float for T where
    T: NumFloat + FloatConst + FromPrimitive + core::ops::AddAssign + core::fmt::Debug
{
}

/// Converts an `f64` literal into the working scalar.
///
/// Only used on compile-time constants that are exactly representable (or
/// deliberately rounded) in every target type, so the conversion cannot fail.
#[inline]
pub(crate) fn lit<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 literal converts to any Float scalar")
}

/// Converts a `u64` into the working scalar, rounding if necessary.
#[inline]
pub(crate) fn int<T: Float>(x: u64) -> T {
    T::from_u64(x).expect("u64 converts to any Float scalar")
}
