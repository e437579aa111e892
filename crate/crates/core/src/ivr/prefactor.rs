//! Semiclassical prefactors with square-root branches continued in time.

use num_complex::Complex;

use crate::classical::Monodromy;
use crate::error::{Error, Result};
use crate::scalar::{csqrt, imag_unit, Real};

/// Continuation state of a complex square root followed along a trajectory.
///
/// The continued root is `sign * principal_sqrt(radicand)`, the root nearer
/// the previous one. Between calls the radicand is taken to move along the
/// chord joining its successive values; the sign flips when that chord crosses
/// the negative real axis. The branch is ambiguous when the chord passes
/// closer to zero than the path can be trusted to follow it, judged from the
/// second difference of the last three radicands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch<T> {
    previous: Option<Complex<T>>,
    before: Option<Complex<T>>,
    sign: T,
}

impl<T: Real> Default for Branch<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Branch<T> {
    pub fn new() -> Self {
        Self {
            previous: None,
            before: None,
            sign: T::one(),
        }
    }

    /// Last radicand seen.
    pub fn previous(&self) -> Option<Complex<T>> {
        self.previous
    }

    /// Advances the continuation to `radicand` without taking the root.
    pub fn follow(&mut self, radicand: Complex<T>, t: T) -> Result<()> {
        let ambiguous = || Error::BranchAmbiguity { t: t.as_f64() };
        if radicand.norm_sqr() == T::zero() || !radicand.re.is_finite() || !radicand.im.is_finite() {
            return Err(ambiguous());
        }
        if let Some(prev) = self.previous {
            // squared distances throughout
            let d = radicand - prev;
            let bend = self.before.map_or(T::zero(), |b| (d - prev + b).norm_sqr());
            let (p2, r2) = (prev.norm_sqr(), radicand.norm_sqr());
            let floor = T::lit(16.0) * T::epsilon() * T::epsilon() * (p2 + r2);
            let limit = bend.max(floor);
            // within a quarter turn the chord keeps at least min(|prev|, |r|)^2 / 2
            let quarter = prev.re * radicand.re + prev.im * radicand.im >= T::zero();
            if !(quarter && limit < p2.min(r2) / T::lit(2.0)) {
                let len2 = d.norm_sqr();
                let s = -(prev.re * d.re + prev.im * d.im) / len2;
                let distance = if len2 > T::zero() && s > T::zero() && s < T::one() {
                    let cross = prev.re * d.im - prev.im * d.re;
                    cross * cross / len2
                } else {
                    p2.min(r2)
                };
                if distance <= limit {
                    return Err(ambiguous());
                }
            }
            if prev.im.is_sign_negative() != radicand.im.is_sign_negative() {
                let crossing = if d.im == T::zero() {
                    prev.re
                } else {
                    prev.re - prev.im * d.re / d.im
                };
                if crossing < T::zero() {
                    self.sign = -self.sign;
                }
            }
        }
        self.before = self.previous;
        self.previous = Some(radicand);
        Ok(())
    }

    /// Continued `sqrt(radicand)`; `t` labels the error.
    pub fn sqrt(&mut self, radicand: Complex<T>, t: T) -> Result<Complex<T>> {
        self.follow(radicand, t)?;
        Ok(csqrt(radicand) * self.sign)
    }
}

/// Radicand of the general coherent-state IVR prefactor with final width
/// `gamma1` and initial width `gamma2`.
pub fn general_radicand<T: Real>(
    m: &Monodromy<T>,
    gamma1: Complex<T>,
    gamma2: Complex<T>,
    hbar: T,
) -> Complex<T> {
    let i = imag_unit::<T>();
    let scale = T::lit(2.0) * (gamma1.re * gamma2.re).sqrt();
    (gamma1 * m.qq + gamma2 * m.pp - i * gamma1 * gamma2 * (hbar * m.qp) + i * (m.pq / hbar))
        / scale
}

/// Radicand of the Herman-Kluk prefactor (`gamma1 = gamma2 = gamma`).
pub fn hk_radicand<T: Real>(m: &Monodromy<T>, gamma: T, hbar: T) -> Complex<T> {
    let s = hbar * gamma;
    Complex::new(m.qq + m.pp, m.pq / s - s * m.qp) / T::lit(2.0)
}

/// `M_qq + i hbar gamma M_qp`, whose inverse square root enters the thawed prefactor.
pub fn tga_denominator<T: Real>(m: &Monodromy<T>, gamma: T, hbar: T) -> Complex<T> {
    Complex::new(m.qq, hbar * gamma * m.qp)
}

/// General prefactor `R = sqrt(radicand)` on the continued branch.
pub fn prefactor_general<T: Real>(
    m: &Monodromy<T>,
    gamma1: Complex<T>,
    gamma2: Complex<T>,
    hbar: T,
    t: T,
    branch: &mut Branch<T>,
) -> Result<Complex<T>> {
    if !(gamma1.re > T::zero() && gamma2.re > T::zero()) {
        return Err(Error::Invalid(
            "prefactor widths need positive real parts".into(),
        ));
    }
    branch.sqrt(general_radicand(m, gamma1, gamma2, hbar), t)
}

/// Herman-Kluk prefactor on the continued branch.
pub fn prefactor_hk<T: Real>(
    m: &Monodromy<T>,
    gamma: T,
    hbar: T,
    t: T,
    branch: &mut Branch<T>,
) -> Result<Complex<T>> {
    branch.sqrt(hk_radicand(m, gamma, hbar), t)
}

/// Thawed-Gaussian prefactor `(gamma / Re gamma1)^{1/4} (M_qq + i hbar gamma M_qp)^{-1/2}`.
/// The branch follows `sqrt(M_qq + i hbar gamma M_qp)`.
pub fn prefactor_tga<T: Real>(
    m: &Monodromy<T>,
    gamma: T,
    gamma1: Complex<T>,
    hbar: T,
    t: T,
    branch: &mut Branch<T>,
) -> Result<Complex<T>> {
    if !(gamma1.re > T::zero()) {
        return Err(Error::Invalid("thawed width needs a positive real part".into()));
    }
    let root = branch.sqrt(tga_denominator(m, gamma, hbar), t)?;
    Ok(root.inv() * (gamma / gamma1.re).sqrt().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::harmonic_monodromy;
    use crate::ivr::width::{squeezed_width, tga_width};
    use proptest::prelude::*;

    fn cr(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    /// Random symplectic matrix from a product of a rotation, squeeze and shear.
    fn symplectic(theta: f64, log_squeeze: f64, shear: f64) -> Monodromy<f64> {
        let (s, c) = theta.sin_cos();
        let k = log_squeeze.exp();
        // [[c, s],[-s, c]] * diag(k, 1/k) * [[1, shear],[0, 1]]
        let a = [[c * k, s / k], [-s * k, c / k]];
        Monodromy {
            qq: a[0][0],
            qp: a[0][0] * shear + a[0][1],
            pq: a[1][0],
            pp: a[1][0] * shear + a[1][1],
        }
    }

    #[test]
    fn identity_gives_unit_prefactors() {
        let m = Monodromy::identity();
        let mut b = Branch::new();
        assert!((prefactor_general(&m, cr(4.0), cr(4.0), 0.5, 0.0, &mut b).unwrap() - cr(1.0)).norm() < 1e-15);
        let mut b = Branch::new();
        assert!((prefactor_hk(&m, 4.0, 0.5, 0.0, &mut b).unwrap() - cr(1.0)).norm() < 1e-15);
        let mut b = Branch::new();
        assert!((prefactor_tga(&m, 4.0, cr(4.0), 0.5, 0.0, &mut b).unwrap() - cr(1.0)).norm() < 1e-15);
    }

    #[test]
    fn unequal_real_widths_at_t0() {
        // (gamma1 + gamma2) / (2 sqrt(gamma1 gamma2)) under the root
        let m = Monodromy::identity();
        let mut b = Branch::new();
        let r = prefactor_general(&m, cr(1.0), cr(9.0), 1.0, 0.0, &mut b).unwrap();
        assert!((r - cr((10.0f64 / 6.0).sqrt())).norm() < 1e-15);
    }

    #[test]
    fn harmonic_matched_hk_winds_smoothly() {
        let (omega, mass, hbar) = (1.3, 2.0, 0.5);
        let gamma = mass * omega / hbar;
        let mut b = Branch::new();
        let mut b_tga = Branch::new();
        for k in 0..=2000 {
            let t = 0.01 * k as f64;
            let m = harmonic_monodromy(omega, mass, t);
            let r = prefactor_hk(&m, gamma, hbar, t, &mut b).unwrap();
            let expected = Complex::from_polar(1.0, -omega * t / 2.0);
            assert!((r - expected).norm() < 1e-12, "t={t}: {r} vs {expected}");
            let w = squeezed_width(omega, mass, gamma, hbar, t);
            let r = prefactor_tga(&m, gamma, w, hbar, t, &mut b_tga).unwrap();
            assert!((r - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn tga_magnitude_identity_on_harmonic() {
        let (omega, mass, gamma, hbar) = (0.6196773, 1.0, 12.0, 1.0);
        let mut b = Branch::new();
        for k in 0..=500 {
            let t = 0.05 * k as f64;
            let m = harmonic_monodromy(omega, mass, t);
            let w = squeezed_width(omega, mass, gamma, hbar, t);
            let r = prefactor_tga(&m, gamma, w, hbar, t, &mut b).unwrap();
            let lhs = r.norm().powi(4) * w.re / gamma * tga_denominator(&m, gamma, hbar).norm_sqr();
            assert!((lhs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ambiguity_is_reported() {
        let mut b = Branch::new();
        b.sqrt(cr(1.0), 0.0).unwrap();
        // straight through zero in one call
        assert!(matches!(b.sqrt(cr(-1.0), 1.0), Err(Error::BranchAmbiguity { .. })));
        // a coarse walk around the circle is caught by its curvature
        let mut b = Branch::new();
        b.sqrt(cr(1.0), 0.0).unwrap();
        b.sqrt(Complex::from_polar(1.0, 1.2), 1.0).unwrap();
        assert!(b.sqrt(Complex::from_polar(1.0, 2.4), 2.0).is_err());
        let mut b = Branch::new();
        b.sqrt(cr(1.0), 0.0).unwrap();
        assert!(b.sqrt(cr(0.0), 1.0).is_err());
    }

    #[test]
    fn fast_straight_pass_near_zero_is_resolved() {
        // radicand moving on a straight line just left of the origin turns by
        // almost half a turn in one call; the root stays continuous
        let mut b = Branch::new();
        let mut last = b.sqrt(Complex::new(-0.016, 0.5), 0.0).unwrap();
        for k in 1..=30 {
            let z = Complex::new(-0.016 - 1e-3 * k as f64, 0.5 - 0.035 * k as f64);
            let r = b.sqrt(z, k as f64).unwrap();
            assert!((r - last).norm() < (r + last).norm());
            assert!((r * r - z).norm() < 1e-15);
            last = r;
        }
    }

    #[test]
    fn continuation_crosses_the_principal_cut() {
        // radicand exp(i phi) for phi from 0 to 4 pi: the root must go once around
        let mut b = Branch::new();
        let mut last = cr(1.0);
        for k in 0..=400 {
            let phi = 4.0 * std::f64::consts::PI * k as f64 / 400.0;
            let r = b.sqrt(Complex::from_polar(1.0, phi), phi).unwrap();
            assert!((r - Complex::from_polar(1.0, phi / 2.0)).norm() < 1e-12);
            assert!((r - last).norm() < (r + last).norm());
            last = r;
        }
        assert!((last - cr(1.0)).norm() < 1e-12 || (last + cr(1.0)).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn hk_is_general_with_equal_widths(
            theta in -3.0f64..3.0, sq in -2.0f64..2.0, shear in -3.0f64..3.0,
            gamma in 0.1f64..20.0, hbar in 0.05f64..2.0,
        ) {
            let m = symplectic(theta, sq, shear);
            prop_assert!((m.det() - 1.0).abs() < 1e-10);
            let a = hk_radicand(&m, gamma, hbar);
            let b = general_radicand(&m, cr(gamma), cr(gamma), hbar);
            prop_assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
        }

        #[test]
        fn tga_and_general_magnitudes_agree(
            theta in -3.0f64..3.0, sq in -2.0f64..2.0, shear in -3.0f64..3.0,
            gamma in 0.1f64..20.0, hbar in 0.05f64..2.0,
        ) {
            let m = symplectic(theta, sq, shear);
            let w = tga_width(&m, gamma, hbar).unwrap();
            let g = prefactor_general(&m, w, cr(gamma), hbar, 0.0, &mut Branch::new()).unwrap();
            let t = prefactor_tga(&m, gamma, w, hbar, 0.0, &mut Branch::new()).unwrap();
            prop_assert!((g.norm() - t.norm()).abs() < 1e-8 * t.norm().max(1.0));
        }
    }
}
