//! Importance sampling of phase-space initial conditions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

/// Density the initial conditions are drawn from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplingDensity {
    /// `|<g(p,q)|g(p0,q0)>|`: normal in `q` with variance `2/gamma`,
    /// in `p` with variance `2 hbar^2 gamma`.
    #[default]
    Magnitude,
    /// `|<g(p,q)|g(p0,q0)>|^2`: variances `1/gamma` and `hbar^2 gamma`.
    SquaredMagnitude,
}

/// One weighted phase-space point. The Monte Carlo mean of
/// `weight * f(q, p)` estimates `\int dq dp / (2 pi hbar) f(q, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceSample<T> {
    pub q: T,
    pub p: T,
    pub weight: T,
}

/// Sampler for the coherent state `(q0, p0)` of real width `gamma`.
#[derive(Clone, Copy, Debug)]
pub struct Sampler<T> {
    pub q0: T,
    pub p0: T,
    pub gamma: T,
    pub hbar: T,
    pub density: SamplingDensity,
}

impl<T: Real> Sampler<T> {
    fn sigmas(&self) -> (T, T) {
        let factor = match self.density {
            SamplingDensity::Magnitude => T::lit(2.0),
            SamplingDensity::SquaredMagnitude => T::one(),
        };
        (
            (factor / self.gamma).sqrt(),
            (factor * self.gamma).sqrt() * self.hbar,
        )
    }

    /// `|<g(p,q)|g(p0,q0)>|` for equal real widths.
    pub fn overlap_magnitude(&self, q: T, p: T) -> T {
        let dq = q - self.q0;
        let dp = p - self.p0;
        let four = T::lit(4.0);
        (-(self.gamma * dq * dq) / four - dp * dp / (four * self.hbar * self.hbar * self.gamma)).exp()
    }

    /// Draws sample `index` from the stream derived from `(seed, index)`.
    pub fn draw(&self, seed: u64, index: u64) -> PhaseSpaceSample<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let zq: f64 = StandardNormal.sample(&mut rng);
        let zp: f64 = StandardNormal.sample(&mut rng);
        let (sq, sp) = self.sigmas();
        let q = self.q0 + sq * T::lit(zq);
        let p = self.p0 + sp * T::lit(zp);
        let mag = self.overlap_magnitude(q, p);
        // density normalisations: \int |ov| = 4 pi hbar, \int |ov|^2 = 2 pi hbar
        let weight = match self.density {
            SamplingDensity::Magnitude => T::lit(2.0) / mag,
            SamplingDensity::SquaredMagnitude => (mag * mag).recip(),
        };
        PhaseSpaceSample { q, p, weight }
    }
}

/// `n` weighted initial conditions for the state `(q0, p0, gamma)`.
pub fn sample_initial_conditions<T: Real>(
    gamma: T,
    hbar: T,
    q0: T,
    p0: T,
    n: usize,
    seed: u64,
    density: SamplingDensity,
) -> Vec<PhaseSpaceSample<T>> {
    let sampler = Sampler {
        q0,
        p0,
        gamma,
        hbar,
        density,
    };
    (0..n as u64).map(|k| sampler.draw(seed, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let v: Vec<f64> = xs.collect();
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var, n)
    }

    #[test]
    fn magnitude_sampling_moments() {
        let (gamma, hbar) = (100.0 / 9.0, 0.05);
        let s = sample_initial_conditions(gamma, hbar, 0.0, 1.0, 20_000, 7, SamplingDensity::Magnitude);
        let (mq, vq, n) = moments(s.iter().map(|x| x.q));
        let sigma = (2.0 / gamma).sqrt();
        assert!(mq.abs() < 4.0 * sigma / (n as f64).sqrt());
        // sample variance standard error ~ var sqrt(2/n)
        assert!((vq - 2.0 / gamma).abs() < 4.0 * (2.0 / gamma) * (2.0 / n as f64).sqrt());
        let (mp, vp, _) = moments(s.iter().map(|x| x.p));
        let var_p = 2.0 * hbar * hbar * gamma;
        assert!((mp - 1.0).abs() < 4.0 * var_p.sqrt() / (n as f64).sqrt());
        assert!((vp - var_p).abs() < 4.0 * var_p * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn squared_sampling_moments() {
        let (gamma, hbar) = (12.0, 1.0);
        let s = sample_initial_conditions(gamma, hbar, 0.3, 0.0, 20_000, 1, SamplingDensity::SquaredMagnitude);
        let (mq, vq, n) = moments(s.iter().map(|x| x.q));
        assert!((mq - 0.3).abs() < 4.0 / (gamma * n as f64).sqrt());
        assert!((vq - 1.0 / gamma).abs() < 4.0 / gamma * (2.0 / n as f64).sqrt());
        // weights times |ov|^2 are exactly one
        for x in &s[..100] {
            let m = Sampler { q0: 0.3, p0: 0.0, gamma, hbar, density: SamplingDensity::SquaredMagnitude }
                .overlap_magnitude(x.q, x.p);
            assert!((x.weight * m * m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_space_volume_estimate() {
        // \int dq dp/(2 pi hbar) |ov|^2 = 1, estimated with magnitude sampling
        let sampler = Sampler { q0: 0.0f64, p0: 1.0, gamma: 3.0, hbar: 0.5, density: SamplingDensity::Magnitude };
        let n = 40_000;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let s = sampler.draw(11, k);
                s.weight * sampler.overlap_magnitude(s.q, s.p).powi(2)
            })
            .collect();
        let (mean, var, _) = moments(vals.into_iter());
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn streams_are_deterministic_and_independent_of_n() {
        let a = sample_initial_conditions(2.0, 1.0, 0.0, 0.0, 50, 3, SamplingDensity::Magnitude);
        let b = sample_initial_conditions(2.0, 1.0, 0.0, 0.0, 10, 3, SamplingDensity::Magnitude);
        assert_eq!(&a[..10], &b[..]);
        let c = sample_initial_conditions(2.0, 1.0, 0.0, 0.0, 10, 4, SamplingDensity::Magnitude);
        assert_ne!(b, c);
    }
}
