//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Scalar`], which is any
//! IEEE float with the constants and conversions we need. `f64` is the type
//! every tolerance in the crate is calibrated for; `f32` works but loses the
//! tight unitarity and quadrature guarantees.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for literals inside generic code.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Scalar")
    }

    /// Lossy conversion to `f64`, for diagnostics and serialization.
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
