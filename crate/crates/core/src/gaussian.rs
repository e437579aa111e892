//! Gaussian wave packets
//!
//! ```text
//! <x|g> = (Re gamma / pi)^{1/4} exp{ -(gamma/2)(x - q)^2 + (i/hbar) p (x - q) }
//! ```
//!
//! with complex width `gamma`, their closed-form overlaps and evaluation of
//! weighted superpositions on a uniform grid.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{imag_unit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState<T> {
    pub q: T,
    pub p: T,
    pub width: Complex<T>,
    pub hbar: T,
}

impl<T: Real> GaussianState<T> {
    pub fn new(q: T, p: T, width: Complex<T>, hbar: T) -> Result<Self> {
        if !(width.re > T::zero()) || !width.im.is_finite() {
            return Err(Error::Invalid(format!(
                "Gaussian width needs a positive real part, got {width}"
            )));
        }
        if !(hbar > T::zero()) {
            return Err(Error::Invalid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { q, p, width, hbar })
    }

    /// Real-width coherent state.
    pub fn coherent(q: T, p: T, gamma: T, hbar: T) -> Result<Self> {
        Self::new(q, p, Complex::new(gamma, T::zero()), hbar)
    }

    #[inline]
    pub fn normalization(&self) -> T {
        (self.width.re / T::PI()).sqrt().sqrt()
    }

    #[inline]
    fn exponent(&self, x: T) -> Complex<T> {
        let u = x - self.q;
        let half = T::lit(0.5);
        -self.width * (half * u * u) + imag_unit::<T>() * (self.p * u / self.hbar)
    }

    pub fn amplitude(&self, x: T) -> Complex<T> {
        self.exponent(x).exp() * self.normalization()
    }

    /// Spatial scale `1 / sqrt(Re gamma)` used for grid coverage checks.
    pub fn sigma(&self) -> T {
        self.width.re.sqrt().recip()
    }
}

/// `<bra|ket> = \int conj(bra(x)) ket(x) dx`.
///
/// The product `conj(bra) ket` is `N exp(-A x^2 / 2 + B x + C)` with
///
/// ```text
/// A = conj(gamma_a) + gamma_b
/// B = conj(gamma_a) q_a + gamma_b q_b + (i/hbar)(p_b - p_a)
/// C = -(conj(gamma_a) q_a^2 + gamma_b q_b^2)/2 - (i/hbar)(p_b q_b - p_a q_a)
/// ```
///
/// and `\int exp(-A x^2/2 + B x + C) dx = sqrt(2 pi / A) exp(B^2 / 2A + C)`
/// on the principal branch, valid for `Re A > 0`. No extra phase is added.
/// The exponent is evaluated in centred form, `x = qbar + y`, to avoid
/// cancellation for distant centres.
pub fn overlap<T: Real>(bra: &GaussianState<T>, ket: &GaussianState<T>) -> Result<Complex<T>> {
    if bra.hbar != ket.hbar {
        return Err(Error::Invalid("overlap of states with different hbar".into()));
    }
    let a = bra.width.conj() + ket.width;
    if !(a.re > T::zero()) {
        return Err(Error::Invalid(format!(
            "overlap exponent has non-positive real part {}",
            a.re
        )));
    }
    Ok(overlap_unchecked(bra, ket, a))
}

#[inline]
pub(crate) fn overlap_unchecked<T: Real>(
    bra: &GaussianState<T>,
    ket: &GaussianState<T>,
    a: Complex<T>,
) -> Complex<T> {
    let i = imag_unit::<T>();
    let half = T::lit(0.5);
    let ga = bra.width.conj();
    let gb = ket.width;
    // shift origin to the midpoint of the centres
    let mid = (bra.q + ket.q) * half;
    let da = bra.q - mid;
    let db = ket.q - mid;
    let hbar = bra.hbar;
    let b = ga * da + gb * db + i * ((ket.p - bra.p) / hbar);
    let c = -(ga * (da * da) + gb * (db * db)) * half - i * ((ket.p * db - bra.p * da) / hbar);
    let norm = bra.normalization() * ket.normalization();
    let prefactor = (Complex::new(T::lit(2.0) * T::PI(), T::zero()) / a).sqrt();
    // the integrand depends only on x - q_a and x - q_b, so y = x - mid is exact
    (b * b / (a * T::lit(2.0)) + c).exp() * prefactor * norm
}

/// Uniform grid `x_j = x_min + j dx`, `j = 0..n`, including both endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_points: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) || n_points < 2 {
            return Err(Error::Invalid(format!(
                "spatial grid needs x_max > x_min and at least two points, got [{x_min}, {x_max}] x {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn spacing(&self) -> T {
        (self.x_max - self.x_min) / T::from_count(self.n_points - 1)
    }

    pub fn point(&self, j: usize) -> T {
        self.x_min + self.spacing() * T::from_count(j)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Trapezoid-rule `\int |psi|^2 dx`.
    pub fn norm(&self, samples: &[Complex<T>]) -> T {
        let total = samples.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let ends = samples.first().map_or(T::zero(), |z| z.norm_sqr())
            + samples.last().map_or(T::zero(), |z| z.norm_sqr());
        (total - ends * T::lit(0.5)) * self.spacing()
    }

    /// True when `center +- 6 sigma` lies inside the grid.
    pub fn covers(&self, center: T, sigma: T) -> bool {
        let reach = T::lit(6.0) * sigma;
        center - reach >= self.x_min && center + reach <= self.x_max
    }
}

// exp(-40) ~ 4e-18 relative to the peak is dropped
const WINDOW_EXPONENT: f64 = 40.0;
// direct re-evaluation interval for the multiplicative recurrence
const REANCHOR: usize = 32;

/// Adds `coefficient * <x|g>` to `out` on `grid`, visiting only the points
/// where the Gaussian is not negligible. Successive grid values are obtained
/// by the exact ratio recurrence `f_{j+1} = f_j r_j`, `r_{j+1} = r_j exp(-gamma dx^2)`.
pub(crate) fn accumulate<T: Real>(
    out: &mut [Complex<T>],
    grid: &SpatialGrid<T>,
    coefficient: Complex<T>,
    g: &GaussianState<T>,
) {
    let dx = grid.spacing();
    let reach = (T::lit(2.0 * WINDOW_EXPONENT) / g.width.re).sqrt();
    let lo = ((g.q - reach - grid.x_min) / dx).floor();
    let hi = ((g.q + reach - grid.x_min) / dx).ceil();
    let last = T::from_count(grid.n_points - 1);
    if hi < T::zero() || lo > last {
        return;
    }
    let j0 = lo.max(T::zero()).to_usize().unwrap_or(0);
    let j1 = hi.min(last).to_usize().unwrap_or(grid.n_points - 1);
    let scale = coefficient * g.normalization();
    let i = imag_unit::<T>();
    let half = T::lit(0.5);
    let step_decay = (-g.width * (dx * dx)).exp();
    let mut j = j0;
    while j <= j1 {
        let x = grid.point(j);
        let u = x - g.q;
        let mut value = g.exponent(x).exp() * scale;
        let mut ratio = (-g.width * (u * dx + half * dx * dx) + i * (g.p * dx / g.hbar)).exp();
        let stop = (j + REANCHOR).min(j1 + 1);
        while j < stop {
            out[j] += value;
            value *= ratio;
            ratio *= step_decay;
            j += 1;
        }
    }
}

/// `Psi(x_j) = sum_k c_k <x_j|g_k>`. Every centre must sit at least six
/// widths `1/sqrt(Re gamma_k)` inside the grid.
pub fn superpose_on_grid<T: Real>(
    terms: &[(Complex<T>, GaussianState<T>)],
    grid: &SpatialGrid<T>,
) -> Result<Vec<Complex<T>>> {
    for (_, g) in terms {
        if !grid.covers(g.q, g.sigma()) {
            return Err(Error::Coverage {
                x_min: grid.x_min.as_f64(),
                x_max: grid.x_max.as_f64(),
                center: g.q.as_f64(),
                sigma: g.sigma().as_f64(),
            });
        }
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); grid.n_points];
    for (c, g) in terms {
        accumulate(&mut out, grid, *c, g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn peak_amplitude() {
        let g = GaussianState::coherent(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((g.amplitude(0.0).re - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert!((g.amplitude(0.0).re - 0.7511255).abs() < 1e-7);
    }

    #[test]
    fn grid_normalization() {
        let g = GaussianState::coherent(0.0, 0.0, 1.0, 1.0).unwrap();
        let grid = SpatialGrid::new(-12.0, 12.0, 2001).unwrap();
        let samples = superpose_on_grid(&[(c(1.0, 0.0), g)], &grid).unwrap();
        assert!((grid.norm(&samples) - 1.0).abs() < 1e-12, "{}", grid.norm(&samples));
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(GaussianState::new(0.0, 0.0, c(0.0, 1.0), 1.0).is_err());
        assert!(GaussianState::new(0.0, 0.0, c(1.0, 1.0), 0.0).is_err());
        let a = GaussianState::coherent(0.0, 0.0, 1.0, 1.0).unwrap();
        let b = GaussianState::coherent(0.0, 0.0, 1.0, 0.5).unwrap();
        assert!(overlap(&a, &b).is_err());
    }

    #[test]
    fn self_overlap_is_one() {
        let g = GaussianState::new(0.3, -2.0, c(2.5, -7.0), 0.05).unwrap();
        let o = overlap(&g, &g).unwrap();
        assert!((o - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn displaced_equal_widths_magnitude() {
        let gamma: f64 = 100.0 / 9.0;
        let d = 0.37;
        let a = GaussianState::coherent(0.1, 1.0, gamma, 0.05).unwrap();
        let b = GaussianState::coherent(0.1 + d, 1.0, gamma, 0.05).unwrap();
        let o = overlap(&a, &b).unwrap();
        assert!((o.norm() - (-gamma * d * d / 4.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn equal_widths_general_magnitude() {
        let (gamma, hbar) = (3.0, 0.7);
        let a = GaussianState::coherent(-0.4, 0.3, gamma, hbar).unwrap();
        let b = GaussianState::coherent(0.5, -0.8, gamma, hbar).unwrap();
        let (dq, dp) = (0.9f64, -1.1f64);
        let expected = (-gamma * dq * dq / 4.0 - dp * dp / (4.0 * hbar * hbar * gamma)).exp();
        assert!((overlap(&a, &b).unwrap().norm() - expected).abs() < 1e-14);
    }

    #[test]
    fn cancelling_pair_is_zero() {
        let g = GaussianState::new(0.2, 1.0, c(2.0, 1.0), 1.0).unwrap();
        let grid = SpatialGrid::new(-10.0, 10.0, 501).unwrap();
        let s = superpose_on_grid(&[(c(1.0, 0.0), g), (c(-1.0, 0.0), g)], &grid).unwrap();
        assert!(s.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_term_matches_amplitude() {
        let g = GaussianState::new(0.2, 3.0, c(2.0, -4.0), 0.3).unwrap();
        let grid = SpatialGrid::new(-10.0, 10.0, 4001).unwrap();
        let s = superpose_on_grid(&[(c(1.0, 0.0), g)], &grid).unwrap();
        for (j, z) in s.iter().enumerate() {
            assert!((z - g.amplitude(grid.point(j))).norm() < 1e-12, "j={j} {z} {}", g.amplitude(grid.point(j)));
        }
    }

    #[test]
    fn coverage_error() {
        let g = GaussianState::coherent(9.0, 0.0, 1.0, 1.0).unwrap();
        let grid = SpatialGrid::new(-10.0, 10.0, 101).unwrap();
        assert!(matches!(
            superpose_on_grid(&[(c(1.0, 0.0), g)], &grid),
            Err(Error::Coverage { .. })
        ));
    }

    fn state() -> impl Strategy<Value = GaussianState<f64>> {
        (-2.0f64..2.0, -3.0f64..3.0, -1.0f64..1.0, -2.0f64..2.0).prop_map(|(q, p, lr, im)| {
            let re = 10f64.powf(lr);
            GaussianState::new(q, p, c(re, im * re), 0.5).unwrap()
        })
    }

    proptest! {
        #[test]
        fn overlap_hermitian(a in state(), b in state()) {
            let ab = overlap(&a, &b).unwrap();
            let ba = overlap(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-12);
        }

        #[test]
        fn overlap_cauchy_schwarz(a in state(), b in state()) {
            prop_assert!(overlap(&a, &b).unwrap().norm() <= 1.0 + 1e-12);
        }
    }
}
