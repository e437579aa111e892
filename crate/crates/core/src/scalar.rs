//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Real floating point type the propagators are generic over.
///
/// Implemented for `f32` and `f64`. The tolerances quoted in the tests
/// assume `f64`; `f32` is supported for quick exploratory runs.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + FftNum
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count to the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cplx<T> = Complex<T>;

/// `i` for a generic scalar.
#[inline]
pub(crate) fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Principal square root without the polar round trip. Signed zeros in the
/// imaginary part select the side of the cut exactly as `Complex::sqrt` does.
#[inline]
pub(crate) fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.re == T::zero() && z.im == T::zero() {
        return Complex::new(T::zero(), z.im);
    }
    let r = match z.norm_sqr() {
        n if n.is_normal() => n.sqrt(),
        _ => z.re.hypot(z.im),
    };
    let half = T::lit(0.5);
    if z.re >= T::zero() {
        let a = ((r + z.re) * half).sqrt();
        Complex::new(a, z.im / (a + a))
    } else {
        let b = ((r - z.re) * half).sqrt().copysign(z.im);
        Complex::new(z.im / (b + b), b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csqrt_matches_principal_root() {
        for k in 0..400 {
            let theta = (k as f64 / 200.0 - 0.999) * std::f64::consts::PI;
            let z = Complex::from_polar(0.3 + 0.01 * k as f64, theta);
            assert!((csqrt(z) - z.sqrt()).norm() < 1e-14 * z.norm().sqrt().max(1.0));
        }
        let up = Complex::new(-4.0f64, 0.0);
        let down = Complex::new(-4.0f64, -0.0);
        assert_eq!(csqrt(up), up.sqrt());
        assert_eq!(csqrt(down), down.sqrt());
        assert_eq!(csqrt(Complex::new(9.0f64, 0.0)), Complex::new(3.0, 0.0));
    }
}
