//! One-dimensional model potentials and their action-angle frequency.
//!
//! Three closed-form models are provided:
//!
//! ```text
//! harmonic   V(x) = mu omega^2 x^2 / 2
//! morse      V(x) = V0 (1 - exp(-lambda x))^2
//! baranger   V(x) = 2 V0 exp(-alpha A) cosh(alpha x)
//! ```
//!
//! The action variable `I(E) = (1/2pi) \oint p dq` is integrated between the
//! classical turning points after the substitution `q = mid + half sin(theta)`,
//! which removes the square-root endpoint behaviour and leaves a smooth
//! integrand for Gauss-Legendre quadrature. The frequency is `dE/dI`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Which closed-form potential, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialKind<T> {
    Harmonic {
        omega: T,
    },
    Morse {
        /// Well depth `V0`.
        depth: T,
        /// Inverse range `lambda`.
        range: T,
    },
    Baranger {
        /// Energy scale `V0`.
        strength: T,
        /// Length offset `A`.
        offset: T,
        /// Inverse length `alpha`.
        stiffness: T,
    },
}

/// Potential value with its first two derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValue<T> {
    pub value: T,
    pub gradient: T,
    pub curvature: T,
}

/// A particle of mass `mass` moving in one of the model potentials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Potential<T> {
    kind: PotentialKind<T>,
    mass: T,
    // 2 V0 exp(-alpha A) for Baranger, unused otherwise
    prefactor: T,
}

fn positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl<T: Real> Potential<T> {
    pub fn new(kind: PotentialKind<T>, mass: T) -> Result<Self> {
        positive("mass", mass)?;
        let prefactor = match kind {
            PotentialKind::Harmonic { omega } => {
                positive("omega", omega)?;
                T::zero()
            }
            PotentialKind::Morse { depth, range } => {
                positive("V0", depth)?;
                positive("lambda", range)?;
                T::zero()
            }
            PotentialKind::Baranger {
                strength,
                offset,
                stiffness,
            } => {
                positive("V0", strength)?;
                positive("alpha", stiffness)?;
                if !offset.is_finite() {
                    return Err(Error::Invalid("A must be finite".into()));
                }
                T::lit(2.0) * strength * (-stiffness * offset).exp()
            }
        };
        Ok(Self {
            kind,
            mass,
            prefactor,
        })
    }

    pub fn harmonic(mass: T, omega: T) -> Result<Self> {
        Self::new(PotentialKind::Harmonic { omega }, mass)
    }

    pub fn morse(mass: T, depth: T, range: T) -> Result<Self> {
        Self::new(PotentialKind::Morse { depth, range }, mass)
    }

    pub fn baranger(mass: T, strength: T, offset: T, stiffness: T) -> Result<Self> {
        Self::new(
            PotentialKind::Baranger {
                strength,
                offset,
                stiffness,
            },
            mass,
        )
    }

    pub fn kind(&self) -> PotentialKind<T> {
        self.kind
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// `V`, `V'` and `V''` at `x`.
    #[inline]
    pub fn evaluate(&self, x: T) -> Result<PotentialValue<T>> {
        let two = T::lit(2.0);
        let out = match self.kind {
            PotentialKind::Harmonic { omega } => {
                let k = self.mass * omega * omega;
                PotentialValue {
                    value: k * x * x / two,
                    gradient: k * x,
                    curvature: k,
                }
            }
            PotentialKind::Morse { depth, range } => {
                let u = (-range * x).exp();
                let one_minus = T::one() - u;
                PotentialValue {
                    value: depth * one_minus * one_minus,
                    gradient: two * depth * range * u * one_minus,
                    curvature: two * depth * range * range * u * (two * u - T::one()),
                }
            }
            PotentialKind::Baranger { stiffness, .. } => {
                let e = (stiffness * x).exp();
                let inv = e.recip();
                let half = self.prefactor / two;
                let value = half * (e + inv);
                PotentialValue {
                    value,
                    gradient: half * stiffness * (e - inv),
                    curvature: stiffness * stiffness * value,
                }
            }
        };
        if out.value.is_finite() && out.gradient.is_finite() && out.curvature.is_finite() {
            Ok(out)
        } else {
            Err(Error::OutOfRange { x: x.as_f64() })
        }
    }

    /// `H = p^2 / 2 mu + V(q)`.
    pub fn energy(&self, q: T, p: T) -> Result<T> {
        Ok(p * p / (T::lit(2.0) * self.mass) + self.evaluate(q)?.value)
    }

    /// Location and value of the potential minimum.
    pub fn minimum(&self) -> (T, T) {
        match self.kind {
            PotentialKind::Harmonic { .. } | PotentialKind::Morse { .. } => (T::zero(), T::zero()),
            PotentialKind::Baranger { .. } => (T::zero(), self.prefactor),
        }
    }

    /// Energy above which motion is no longer bound, if any.
    pub fn dissociation_energy(&self) -> Option<T> {
        match self.kind {
            PotentialKind::Morse { depth, .. } => Some(depth),
            _ => None,
        }
    }

    /// Small-oscillation angular frequency at the minimum.
    pub fn harmonic_frequency(&self) -> T {
        let (x0, _) = self.minimum();
        let k = self
            .evaluate(x0)
            .expect("potential finite at its minimum")
            .curvature;
        (k / self.mass).sqrt()
    }

    fn check_bound(&self, energy: T) -> Result<()> {
        let (_, vmin) = self.minimum();
        if !(energy > vmin) {
            return Err(Error::BelowMinimum {
                energy: energy.as_f64(),
                minimum: vmin.as_f64(),
            });
        }
        if let Some(threshold) = self.dissociation_energy() {
            if energy >= threshold {
                return Err(Error::Unbound {
                    energy: energy.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// How a frequency was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrequencyPath {
    Analytic,
    NumericDerivative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyEstimate<T> {
    pub omega: T,
    pub path: FrequencyPath,
}

/// Action-angle analysis of bound one-dimensional motion.
#[derive(Clone, Debug)]
pub struct ActionAngle<T> {
    rule: GaussLegendre<T>,
}

impl<T: Real> Default for ActionAngle<T> {
    fn default() -> Self {
        Self::new(64)
    }
}

impl<T: Real> ActionAngle<T> {
    /// Uses a Gauss-Legendre rule of the given order in the angle variable.
    pub fn new(order: usize) -> Self {
        Self {
            rule: GaussLegendre::new(order),
        }
    }

    /// Classical turning points `(left, right)` at energy `energy`.
    pub fn turning_points(&self, pot: &Potential<T>, energy: T) -> Result<(T, T)> {
        pot.check_bound(energy)?;
        let (x0, _) = pot.minimum();
        let left = turning_point(pot, energy, x0, -T::one())?;
        let right = turning_point(pot, energy, x0, T::one())?;
        Ok((left, right))
    }

    /// `I(E) = (1/pi) \int_{q-}^{q+} sqrt(2 mu (E - V)) dq`.
    pub fn action(&self, pot: &Potential<T>, energy: T) -> Result<T> {
        let (a, b) = self.turning_points(pot, energy)?;
        let two = T::lit(2.0);
        let mid = (a + b) / two;
        let half = (b - a) / two;
        let two_mu = two * pot.mass();
        let mut failure = None;
        let integral = self.rule.integrate(-T::FRAC_PI_2(), T::FRAC_PI_2(), |theta| {
            let (s, c) = theta.sin_cos();
            match pot.evaluate(mid + half * s) {
                Ok(v) => (two_mu * (energy - v.value).max(T::zero())).sqrt() * half * c,
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(integral / T::PI()),
        }
    }

    /// Period of the bound orbit, `2 \int dq / (p / mu)`.
    pub fn period(&self, pot: &Potential<T>, energy: T) -> Result<T> {
        let (a, b) = self.turning_points(pot, energy)?;
        let two = T::lit(2.0);
        let mid = (a + b) / two;
        let half = (b - a) / two;
        let mu = pot.mass();
        let mut failure = None;
        let integral = self.rule.integrate(-T::FRAC_PI_2(), T::FRAC_PI_2(), |theta| {
            let (s, c) = theta.sin_cos();
            match pot.evaluate(mid + half * s) {
                Ok(v) => {
                    let kinetic = (energy - v.value).max(T::min_positive_value());
                    mu * half * c / (two * mu * kinetic).sqrt()
                }
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(two * integral),
        }
    }

    /// `omega(E) = dE/dI`, analytic for the harmonic and Morse models.
    pub fn frequency(&self, pot: &Potential<T>, energy: T) -> Result<FrequencyEstimate<T>> {
        pot.check_bound(energy)?;
        match pot.kind() {
            PotentialKind::Harmonic { omega } => Ok(FrequencyEstimate {
                omega,
                path: FrequencyPath::Analytic,
            }),
            PotentialKind::Morse { depth, range } => {
                let omega0 = range * (T::lit(2.0) * depth / pot.mass()).sqrt();
                Ok(FrequencyEstimate {
                    omega: omega0 * (T::one() - energy / depth).sqrt(),
                    path: FrequencyPath::Analytic,
                })
            }
            PotentialKind::Baranger { .. } => self.frequency_numeric(pot, energy),
        }
    }

    /// `1 / (dI/dE)` from a centred difference of the action with one
    /// Richardson extrapolation step.
    pub fn frequency_numeric(&self, pot: &Potential<T>, energy: T) -> Result<FrequencyEstimate<T>> {
        pot.check_bound(energy)?;
        let (_, vmin) = pot.minimum();
        let mut gap = energy - vmin;
        if let Some(threshold) = pot.dissociation_energy() {
            gap = gap.min(threshold - energy);
        }
        let h = T::lit(1e-2) * gap;
        let two = T::lit(2.0);
        let central = |step: T| -> Result<T> {
            let up = self.action(pot, energy + step)?;
            let down = self.action(pot, energy - step)?;
            Ok((up - down) / (two * step))
        };
        let coarse = central(h)?;
        let fine = central(h / two)?;
        let slope = (T::lit(4.0) * fine - coarse) / T::lit(3.0);
        if !(slope > T::zero()) {
            return Err(Error::Inconsistent(format!(
                "dI/dE = {slope} is not positive at E = {energy}"
            )));
        }
        Ok(FrequencyEstimate {
            omega: slope.recip(),
            path: FrequencyPath::NumericDerivative,
        })
    }
}

/// Action variable with the default 64-point rule.
pub fn action_variable<T: Real>(pot: &Potential<T>, energy: T) -> Result<T> {
    ActionAngle::default().action(pot, energy)
}

/// Frequency with the default 64-point rule.
pub fn frequency<T: Real>(pot: &Potential<T>, energy: T) -> Result<FrequencyEstimate<T>> {
    ActionAngle::default().frequency(pot, energy)
}

/// Finds `V(x) = energy` on one side of the minimum `x0`. The bracket is
/// grown outward by doubling, shrunk by bisection until it stops shrinking,
/// then polished with safeguarded Newton steps.
fn turning_point<T: Real>(pot: &Potential<T>, energy: T, x0: T, direction: T) -> Result<T> {
    // points where the potential overflows count as classically forbidden
    let excess = |x: T| match pot.evaluate(x) {
        Ok(v) => v.value - energy,
        Err(_) => T::infinity(),
    };
    let mut inner = x0;
    let mut step = T::one();
    let mut outer = x0 + direction * step;
    let mut grown = 0;
    while excess(outer) <= T::zero() {
        inner = outer;
        step *= T::lit(2.0);
        outer = x0 + direction * step;
        grown += 1;
        if grown > 1100 {
            return Err(Error::Unbound {
                energy: energy.as_f64(),
                threshold: f64::NAN,
            });
        }
    }
    let (mut lo, mut hi) = (inner, outer);
    for _ in 0..2000 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid == lo || mid == hi {
            break;
        }
        if excess(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let mut x = (lo + hi) / T::lit(2.0);
    for _ in 0..4 {
        let Ok(v) = pot.evaluate(x) else { break };
        if v.gradient == T::zero() {
            break;
        }
        let next = x - (v.value - energy) / v.gradient;
        if !(next >= a && next <= b) {
            break;
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn morse() -> Potential<f64> {
        Potential::morse(1.0, 30.0, 0.08).unwrap()
    }

    fn baranger() -> Potential<f64> {
        Potential::baranger(1.0, 1.0, 5.0, 1.0).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let v = morse().evaluate(0.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.gradient, 0.0);
        assert!((v.curvature - 0.384).abs() < 1e-14);

        let v = baranger().evaluate(0.0).unwrap();
        assert!((v.value - 2.0 * (-5.0f64).exp()).abs() < 1e-16);
        assert!((v.value - 0.013475894).abs() < 1e-9);

        let h = Potential::harmonic(1.0, 2.0).unwrap();
        let v = h.evaluate(3.0).unwrap();
        assert_eq!(v.value, 18.0);
        assert_eq!(v.curvature, 4.0);
    }

    #[test]
    fn energy_examples() {
        assert!((baranger().energy(0.0, 1.0).unwrap() - 0.513475894).abs() < 1e-9);
        assert_eq!(morse().energy(0.0, 0.0).unwrap(), 0.0);
        let h = Potential::harmonic(1.0, 1.0).unwrap();
        assert_eq!(h.energy(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn overflow_is_an_error_not_infinity() {
        assert!(matches!(
            baranger().evaluate(800.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            baranger().evaluate(-800.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(morse().evaluate(-1.0e4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Potential::<f64>::harmonic(0.0, 1.0).is_err());
        assert!(Potential::<f64>::morse(1.0, -1.0, 0.1).is_err());
        assert!(Potential::<f64>::baranger(1.0, 1.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn harmonic_action_is_energy_over_omega() {
        let h = Potential::harmonic(1.0f64, 1.0).unwrap();
        let i = action_variable(&h, 1.0).unwrap();
        assert!((i - 1.0).abs() < 1e-13, "{i}");
    }

    #[test]
    fn action_domain_errors() {
        assert!(matches!(
            action_variable(&morse(), 0.0),
            Err(Error::BelowMinimum { .. })
        ));
        assert!(matches!(
            action_variable(&morse(), 30.0),
            Err(Error::Unbound { .. })
        ));
        assert!(matches!(
            frequency(&morse(), 45.0),
            Err(Error::Unbound { .. })
        ));
        assert!(matches!(
            action_variable(&baranger(), 0.01),
            Err(Error::BelowMinimum { .. })
        ));
    }

    #[test]
    fn morse_turning_points_are_tight() {
        let aa = ActionAngle::default();
        let (a, b) = aa.turning_points(&morse(), 15.0).unwrap();
        let r = (0.5f64).sqrt();
        let exact_a = -(1.0 + r).ln() / 0.08;
        let exact_b = -(1.0 - r).ln() / 0.08;
        assert!((a - exact_a).abs() < 1e-12);
        assert!((b - exact_b).abs() < 1e-12);
    }

    #[test]
    fn harmonic_frequency_constant() {
        let h = Potential::harmonic(1.0f64, 1.7).unwrap();
        for e in [1e-3, 0.5, 2.0, 100.0] {
            let f = frequency(&h, e).unwrap();
            assert_eq!(f.path, FrequencyPath::Analytic);
            assert!((f.omega - 1.7).abs() < 1e-12);
            let n = ActionAngle::default().frequency_numeric(&h, e).unwrap();
            assert!((n.omega - 1.7).abs() < 1e-9, "{e}: {}", n.omega);
        }
    }

    #[test]
    fn morse_numeric_frequency_matches_analytic() {
        let aa = ActionAngle::default();
        for e in [0.3, 5.0, 15.0, 25.0, 29.0] {
            let a = aa.frequency(&morse(), e).unwrap();
            let n = aa.frequency_numeric(&morse(), e).unwrap();
            assert_eq!(n.path, FrequencyPath::NumericDerivative);
            assert!(((a.omega - n.omega) / a.omega).abs() < 1e-8, "{e}");
        }
    }

    #[test]
    fn morse_frequency_decreasing_to_zero() {
        let aa = ActionAngle::default();
        let mut prev = f64::INFINITY;
        for k in 1..300 {
            let e = 30.0 * k as f64 / 300.0;
            let w = aa.frequency(&morse(), e).unwrap().omega;
            assert!(w < prev);
            prev = w;
        }
        assert!(aa.frequency(&morse(), 30.0 - 1e-10).unwrap().omega < 1e-5);
    }

    #[test]
    fn baranger_uses_numeric_path() {
        let f = frequency(&baranger(), 0.5134759).unwrap();
        assert_eq!(f.path, FrequencyPath::NumericDerivative);
    }

    proptest! {
        #[test]
        fn action_increases_with_energy(e in 0.02f64..5.0, de in 1e-3f64..1.0) {
            let aa = ActionAngle::default();
            let b = baranger();
            prop_assert!(aa.action(&b, e + de).unwrap() > aa.action(&b, e).unwrap());
            let m = morse();
            let (e1, e2) = (e, (e + de).min(29.9));
            if e2 > e1 {
                prop_assert!(aa.action(&m, e2).unwrap() > aa.action(&m, e1).unwrap());
            }
        }
    }
}
