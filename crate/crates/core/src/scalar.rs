//! Scalar abstraction shared by every module.
//!
//! All simulation code is written against [`Real`], which is implemented for
//! `f32` and `f64`. Complex amplitudes are `num_complex::Complex<T>`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the simulator can run on.
///
/// The tolerance constants are the thresholds the algorithms use internally.
/// They are tied to the precision of the type, so `f32` gets looser values.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Smallest admissible vacuum population `|a₀₀|²` of a sender.
    const DEGENERATE_RESIDUAL: f64;
    /// Row norm / orthogonality tolerance for constraint validation.
    const VALIDATION_TOL: f64;
    /// Max-entry tolerance of `W†W − I` for completed blocks.
    const UNITARITY_TOL: f64;
    /// Gram-Schmidt residual below which a candidate is skipped.
    const COMPLETION_SKIP: f64;
    /// Magnitude below which a decode denominator counts as zero.
    const SINGULAR_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEGENERATE_RESIDUAL: f64 = 1e-12;
    const VALIDATION_TOL: f64 = 1e-10;
    const UNITARITY_TOL: f64 = 1e-12;
    const COMPLETION_SKIP: f64 = 1e-10;
    const SINGULAR_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const DEGENERATE_RESIDUAL: f64 = 1e-6;
    const VALIDATION_TOL: f64 = 1e-5;
    const UNITARITY_TOL: f64 = 1e-5;
    const COMPLETION_SKIP: f64 = 1e-4;
    const SINGULAR_TOL: f64 = 1e-6;
}

#[inline]
pub(crate) fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Converts a complex value to double precision.
#[inline]
pub fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// Converts a double precision complex value to the scalar type.
#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}
