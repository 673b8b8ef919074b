//! Floating point abstraction shared by the geometry code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Scalar type for geometry: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Per-entry tolerance used when checking rotation matrices for
    /// orthonormality. `1e-12` for `f64`, scaled to the type's precision otherwise.
    fn orthonormal_tolerance() -> Self;

    /// Lossless-or-nearest conversion from an `f64` constant.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn orthonormal_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn orthonormal_tolerance() -> Self {
        1e-12
    }
}
