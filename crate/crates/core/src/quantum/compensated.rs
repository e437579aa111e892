//! Double-word arithmetic for norm-exact split-operator stepping.
//!
//! The wavefunction is carried as `hi + lo` with `|lo| <= ulp(hi)/2`, and every
//! constant (FFT twiddles, potential and kinetic phase factors) is a double-word
//! complex number of unit modulus to about `eps^2`. Products and sums go through
//! error-free transformations, so the step is unitary well below `1e-20` and the
//! norm does not drift over 10^5 steps.

use num_complex::Complex;

use crate::scalar::Real;

#[inline(always)]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Complex double-word number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Pair<T> {
    pub hi: Complex<T>,
    pub lo: Complex<T>,
}

impl<T: Real> Pair<T> {
    pub fn new(hi: Complex<T>) -> Self {
        Self {
            hi,
            lo: Complex::new(T::zero(), T::zero()),
        }
    }

    /// `exp(i theta)` corrected to unit modulus in double-word precision.
    pub fn unit(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        let (p1, e1) = two_prod(c, c);
        let (p2, e2) = two_prod(s, s);
        let (big, small) = if p1 >= p2 { (p1, p2) } else { (p2, p1) };
        let defect = ((big - T::one()) + small) + (e1 + e2);
        let hi = Complex::new(c, s);
        Self {
            hi,
            lo: -hi * (defect / T::lit(2.0)),
        }
    }

    pub fn conj(self) -> Self {
        Self {
            hi: self.hi.conj(),
            lo: self.lo.conj(),
        }
    }

    pub fn scale(self, k: T) -> Self {
        Self {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    pub fn value(self) -> Complex<T> {
        self.hi + self.lo
    }

    #[inline(always)]
    fn renormalize(re: T, im: T, lo: Complex<T>) -> Self {
        let (re, a) = two_sum(re, lo.re);
        let (im, b) = two_sum(im, lo.im);
        Self {
            hi: Complex::new(re, im),
            lo: Complex::new(a, b),
        }
    }

    #[inline(always)]
    pub fn mul(self, w: Self) -> Self {
        let (h, x) = (self.hi, w.hi);
        let (p1, e1) = two_prod(h.re, x.re);
        let (p2, e2) = two_prod(h.im, x.im);
        let (re, e3) = two_sum(p1, -p2);
        let (p3, e4) = two_prod(h.re, x.im);
        let (p4, e5) = two_prod(h.im, x.re);
        let (im, e6) = two_sum(p3, p4);
        let lo = self.lo * x + h * w.lo + Complex::new(e1 - e2 + e3, e4 + e5 + e6);
        Self::renormalize(re, im, lo)
    }

    #[inline(always)]
    pub fn add(self, o: Self) -> Self {
        let (re, e1) = two_sum(self.hi.re, o.hi.re);
        let (im, e2) = two_sum(self.hi.im, o.hi.im);
        let lo = self.lo + o.lo + Complex::new(e1, e2);
        Self::renormalize(re, im, lo)
    }

    #[inline(always)]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

/// Radix-2 decimation-in-time FFT on double-word data, unnormalised in both
/// directions.
pub(crate) struct PairFft<T> {
    twiddles: Vec<Pair<T>>,
    reversed: Vec<usize>,
}

impl<T: Real> PairFft<T> {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2);
        let bits = n.trailing_zeros();
        let reversed = (0..n)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        let step = -T::lit(2.0) * T::PI() / T::from_count(n);
        let twiddles = (0..n / 2)
            .map(|k| Pair::unit(step * T::from_count(k)))
            .collect();
        Self { twiddles, reversed }
    }

    pub fn process(&self, data: &mut [Pair<T>], inverse: bool) {
        let n = data.len();
        debug_assert_eq!(n, self.reversed.len());
        for (i, &j) in self.reversed.iter().enumerate() {
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for block in data.chunks_exact_mut(len) {
                let (a, b) = block.split_at_mut(half);
                for (k, (u, v)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let t = v.mul(w);
                    let x = *u;
                    *u = x.add(t);
                    *v = x.add(t.neg());
                }
            }
            len *= 2;
        }
    }
}
