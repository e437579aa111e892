//! Time-dependent Gaussian width parameters.

use num_complex::Complex;

use crate::classical::Monodromy;
use crate::error::{Error, Result};
use crate::scalar::{csqrt, imag_unit, Real};

/// Thawed-Gaussian width driven by the trajectory's stability matrix:
///
/// ```text
/// gamma_1 = -(i/hbar) (M_pq + i hbar gamma M_pp) / (M_qq + i hbar gamma M_qp)
/// ```
pub fn tga_width<T: Real>(m: &Monodromy<T>, gamma: T, hbar: T) -> Result<Complex<T>> {
    let i = imag_unit::<T>();
    let s = hbar * gamma;
    let den = Complex::new(m.qq, s * m.qp);
    if den.norm_sqr() < T::lit(1e-60) {
        return Err(Error::Singular {
            magnitude: den.norm().as_f64(),
        });
    }
    let num = Complex::new(m.pq, s * m.pp);
    let width = -i / hbar * num / den;
    if !(width.re > T::zero()) {
        return Err(Error::Inconsistent(format!(
            "thawed width lost its positive real part: {width}"
        )));
    }
    Ok(width)
}

/// Width of a squeezed state in a harmonic well of frequency `omega`.
pub fn squeezed_width<T: Real>(omega: T, mass: T, gamma: T, hbar: T, t: T) -> Complex<T> {
    let i = imag_unit::<T>();
    let (s, c) = (omega * t).sin_cos();
    let s_hg = hbar * gamma;
    let num = Complex::new(-mass * omega * s, s_hg * c);
    let den = Complex::new(c, s_hg / (mass * omega) * s);
    -i / hbar * num / den
}

/// Principal `n`-th root, `|arg| < pi / (2n)` for `Re width > 0`.
pub fn root_width<T: Real>(width: Complex<T>, order: u32) -> Complex<T> {
    match order {
        1 => width,
        2 => csqrt(width),
        4 => csqrt(csqrt(width)),
        n => width.powf(T::from_u32(n).expect("small order").recip()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::harmonic_monodromy;

    #[test]
    fn identity_keeps_width() {
        let w = tga_width(&Monodromy::identity(), 3.5, 0.2).unwrap();
        assert!((w - Complex::new(3.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn harmonic_monodromy_gives_squeezed_width() {
        let (omega, mass, gamma, hbar) = (0.8, 1.5, 7.0, 0.3);
        let period = 2.0 * std::f64::consts::PI / omega;
        for k in 0..=400 {
            let t = period * k as f64 / 400.0;
            let a = tga_width(&harmonic_monodromy(omega, mass, t), gamma, hbar).unwrap();
            let b = squeezed_width(omega, mass, gamma, hbar, t);
            assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
        }
    }

    #[test]
    fn matched_width_does_not_breathe() {
        let (omega, mass, hbar) = (2.0, 0.5, 0.25);
        let gamma = mass * omega / hbar;
        for k in 0..50 {
            let w = squeezed_width(omega, mass, gamma, hbar, 0.37 * k as f64);
            assert!((w - Complex::new(gamma, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn roots() {
        let r = root_width(Complex::new(16.0f64, 0.0), 4);
        assert!((r - Complex::new(2.0, 0.0)).norm() < 1e-15);
        let r = root_width(Complex::new(5.0f64, 0.0), 6);
        assert!(r.im.abs() < 1e-16 && (r.re - 5f64.powf(1.0 / 6.0)).abs() < 1e-15);
        let r = root_width(Complex::new(1e-3f64, 2.0), 2);
        assert!(r.re > 0.0);
        let z = Complex::new(0.01f64, 3.0);
        let r = root_width(z, 4);
        assert!((r.arg() - z.arg() / 4.0).abs() < 1e-14);
        assert!((r.norm() - z.norm().powf(0.25)).abs() < 1e-14);
    }
}
