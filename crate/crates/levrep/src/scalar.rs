//! Floating-point abstraction for the closed-form layer.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type the analytic formulas are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + core::fmt::Debug + 'static
{
    /// Shorthand for lossy conversion of an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Shorthand for converting a small integer.
    #[inline]
    fn of(n: u32) -> Self {
        Self::from_u32(n).expect("small integer")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + core::fmt::Debug + 'static
{
}
