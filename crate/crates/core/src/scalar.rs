//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point field the library computes over (`f32` or `f64`).
///
/// Tolerances that only make sense relative to the precision of the type are
/// exposed as associated constants so that generic code does not hard-code
/// `f64` thresholds.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Singular values below `SPECTRUM_CLAMP * sigma_max` are treated as zero.
    const SPECTRUM_CLAMP: f64;
    /// Relative tolerance for monotone bisections (Orlicz gauges).
    const BISECTION_TOL: f64;

    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const SPECTRUM_CLAMP: f64 = 1e-13;
    const BISECTION_TOL: f64 = 1e-12;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    const SPECTRUM_CLAMP: f64 = 1e-6;
    const BISECTION_TOL: f64 = 1e-6;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `e^{i theta}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn abs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}
