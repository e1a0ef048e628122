//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the engine is generic over: `f32` or `f64`.
///
/// Besides the float operations this carries the two precision-dependent
/// thresholds the engine uses: the tolerance at which a supposedly
/// normalized input is rejected, and the probability below which a
/// measurement branch is treated as absent.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Maximum norm deviation accepted on user-supplied states and strategies.
    fn validation_tol() -> Self;
    /// Branch probability below which a collapse is not renormalized.
    fn collapse_floor() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-9
    }
    fn collapse_floor() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-4
    }
    fn collapse_floor() -> Self {
        1e-6
    }
}

/// Complex amplitude over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}
