//! Classical trajectories co-integrated with the action and the 2x2
//! monodromy (stability) matrix.

use crate::error::{Error, Result};
use crate::potentials::{Potential, PotentialKind};
use crate::scalar::Real;

/// Stability matrix `d(q_t, p_t) / d(q_i, p_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy<T> {
    pub qq: T,
    pub qp: T,
    pub pq: T,
    pub pp: T,
}

impl<T: Real> Monodromy<T> {
    pub fn identity() -> Self {
        Self {
            qq: T::one(),
            qp: T::zero(),
            pq: T::zero(),
            pp: T::one(),
        }
    }

    pub fn det(&self) -> T {
        self.qq * self.pp - self.qp * self.pq
    }

    fn cast(&self) -> Monodromy<f64> {
        Monodromy {
            qq: self.qq.as_f64(),
            qp: self.qp.as_f64(),
            pq: self.pq.as_f64(),
            pp: self.pp.as_f64(),
        }
    }
}

/// Monodromy of a harmonic oscillator of frequency `omega` and mass `mass`
/// after time `t`.
pub fn harmonic_monodromy<T: Real>(omega: T, mass: T, t: T) -> Monodromy<T> {
    let (s, c) = (omega * t).sin_cos();
    Monodromy {
        qq: c,
        qp: s / (mass * omega),
        pq: -mass * omega * s,
        pp: c,
    }
}

/// Phase-space point with its accumulated action `S = \int L dt` and monodromy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryState<T> {
    pub t: T,
    pub q: T,
    pub p: T,
    pub action: T,
    pub monodromy: Monodromy<T>,
}

impl<T: Real> TrajectoryState<T> {
    pub fn initial(q: T, p: T) -> Self {
        Self {
            t: T::zero(),
            q,
            p,
            action: T::zero(),
            monodromy: Monodromy::identity(),
        }
    }

    pub(crate) fn to_f64(self) -> TrajectoryState<f64> {
        TrajectoryState {
            t: self.t.as_f64(),
            q: self.q.as_f64(),
            p: self.p.as_f64(),
            action: self.action.as_f64(),
            monodromy: self.monodromy.cast(),
        }
    }

    fn pack(&self) -> [T; 7] {
        let m = &self.monodromy;
        [self.q, self.p, self.action, m.qq, m.qp, m.pq, m.pp]
    }

    fn unpack(t: T, y: &[T; 7]) -> Self {
        Self {
            t,
            q: y[0],
            p: y[1],
            action: y[2],
            monodromy: Monodromy {
                qq: y[3],
                qp: y[4],
                pq: y[5],
                pp: y[6],
            },
        }
    }
}

/// Fixed-step fourth-order Runge-Kutta settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Largest step; each output interval is split into equal substeps no longer than this.
    pub dt: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(dt: T) -> Result<Self> {
        if dt > T::zero() && dt.is_finite() {
            Ok(Self { dt })
        } else {
            Err(Error::Invalid(format!("integrator dt must be positive, got {dt}")))
        }
    }

    /// `1e-3` time units, or `1e-4` of the small-oscillation period if that is
    /// shorter. Morse gets `5e-5` of the period: the thawed prefactor turns
    /// sharply near the steep wall late in long runs.
    pub fn default_for(pot: &Potential<T>) -> Self {
        let period = T::lit(2.0) * T::PI() / pot.harmonic_frequency();
        let dt = match pot.kind() {
            PotentialKind::Baranger { .. } => T::lit(1e-3),
            PotentialKind::Morse { .. } => T::lit(5e-5) * period,
            _ => T::lit(1e-3).min(T::lit(1e-4) * period),
        };
        Self { dt }
    }
}

/// What the integrator is reporting to an observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Checkpoint {
    /// An intermediate step, reported every `stride` substeps.
    Substep,
    /// The state at requested output time `k` (including `k = 0`).
    Output(usize),
}

pub(crate) fn validate_times<T: Real>(times: &[T]) -> Result<()> {
    match times.first() {
        None => return Err(Error::Invalid("time grid is empty".into())),
        Some(t0) if *t0 != T::zero() => {
            return Err(Error::Invalid("time grid must start at 0".into()))
        }
        _ => {}
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("time grid must be strictly increasing".into()));
    }
    Ok(())
}

#[inline]
fn rhs<T: Real>(pot: &Potential<T>, y: &[T; 7]) -> Result<[T; 7]> {
    let mu = pot.mass();
    let v = pot.evaluate(y[0])?;
    let (q_dot, p_dot) = (y[1] / mu, -v.gradient);
    let lagrangian = y[1] * q_dot / T::lit(2.0) - v.value;
    Ok([
        q_dot,
        p_dot,
        lagrangian,
        y[5] / mu,
        y[6] / mu,
        -v.curvature * y[3],
        -v.curvature * y[4],
    ])
}

#[inline]
fn rk4_step<T: Real>(pot: &Potential<T>, y: &[T; 7], h: T) -> Result<[T; 7]> {
    let half = h / T::lit(2.0);
    let axpy = |a: &[T; 7], s: T, k: &[T; 7]| -> [T; 7] { std::array::from_fn(|i| a[i] + s * k[i]) };
    let k1 = rhs(pot, y)?;
    let k2 = rhs(pot, &axpy(y, half, &k1))?;
    let k3 = rhs(pot, &axpy(y, half, &k2))?;
    let k4 = rhs(pot, &axpy(y, h, &k3))?;
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let out: [T; 7] =
        std::array::from_fn(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]));
    if out.iter().all(|x| x.is_finite()) {
        Ok(out)
    } else {
        Err(Error::OutOfRange { x: out[0].as_f64() })
    }
}

/// Integrates from `(q, p)` and calls `observer` at every output time and,
/// if `stride > 0`, after every `stride`-th substep in between.
pub fn propagate_observed<T, F>(
    pot: &Potential<T>,
    q: T,
    p: T,
    times: &[T],
    cfg: &IntegratorConfig<T>,
    stride: usize,
    mut observer: F,
) -> Result<()>
where
    T: Real,
    F: FnMut(&TrajectoryState<T>, Checkpoint) -> Result<()>,
{
    validate_times(times)?;
    let mut state = TrajectoryState::initial(q, p);
    pot.evaluate(q)?;
    observer(&state, Checkpoint::Output(0))?;
    let mut y = state.pack();
    let mut counter = 0usize;
    for (k, w) in times.windows(2).enumerate() {
        let span = w[1] - w[0];
        let n = (span / cfg.dt - T::lit(1e-9)).ceil().max(T::one());
        let steps = n.to_usize().unwrap_or(1);
        let h = span / n;
        for s in 0..steps {
            y = rk4_step(pot, &y, h).map_err(|_| Error::Escaped {
                last: Box::new(state.to_f64()),
            })?;
            let t = if s + 1 == steps {
                w[1]
            } else {
                w[0] + h * T::from_count(s + 1)
            };
            state = TrajectoryState::unpack(t, &y);
            counter += 1;
            if s + 1 < steps && stride > 0 && counter.is_multiple_of(stride) {
                observer(&state, Checkpoint::Substep)?;
            }
        }
        observer(&state, Checkpoint::Output(k + 1))?;
    }
    Ok(())
}

/// States at each requested time. `times` must start at 0 and increase strictly.
pub fn propagate<T: Real>(
    pot: &Potential<T>,
    q: T,
    p: T,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<TrajectoryState<T>>> {
    let mut out = Vec::with_capacity(times.len());
    propagate_observed(pot, q, p, times, cfg, 0, |s, _| {
        out.push(*s);
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
    }

    #[test]
    fn harmonic_monodromy_examples() {
        let m = harmonic_monodromy(2.0, 1.0, 0.0);
        assert_eq!(m, Monodromy::identity());
        let m = harmonic_monodromy(2.0, 1.0, PI / 4.0);
        assert!(m.qq.abs() < 1e-15 && (m.qp - 0.5).abs() < 1e-15);
        assert!((m.pq + 2.0).abs() < 1e-15 && m.pp.abs() < 1e-15);
        let m = harmonic_monodromy(1.0, 3.0, PI);
        assert!((m.qq + 1.0).abs() < 1e-15 && (m.pp + 1.0).abs() < 1e-15);
        assert!(m.qp.abs() < 1e-15 && m.pq.abs() < 1e-14);
    }

    #[test]
    fn harmonic_full_period() {
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let cfg = IntegratorConfig::default_for(&pot);
        let s = propagate(&pot, 0.0, 1.0, &[0.0, 2.0 * PI], &cfg).unwrap();
        let end = s[1];
        assert!(end.q.abs() < 1e-10 && (end.p - 1.0).abs() < 1e-10);
        assert!(end.action.abs() < 1e-10);
        let m = end.monodromy;
        assert!((m.qq - 1.0).abs() < 1e-10 && m.qp.abs() < 1e-10);
        assert!(m.pq.abs() < 1e-10 && (m.pp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn harmonic_monodromy_matches_closed_form() {
        let (mu, omega) = (1.3, 0.7);
        let pot = Potential::harmonic(mu, omega).unwrap();
        let times = grid(30.0, 60);
        let cfg = IntegratorConfig::default_for(&pot);
        for s in propagate(&pot, 0.4, -1.2, &times, &cfg).unwrap() {
            let exact = harmonic_monodromy(omega, mu, s.t);
            let m = s.monodromy;
            for (a, b) in [(m.qq, exact.qq), (m.qp, exact.qp), (m.pq, exact.pq), (m.pp, exact.pp)] {
                assert!((a - b).abs() < 1e-8, "t={} {a} vs {b}", s.t);
            }
        }
    }

    #[test]
    fn rejects_bad_time_grids() {
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let cfg = IntegratorConfig::new(0.01).unwrap();
        assert!(propagate(&pot, 0.0, 1.0, &[], &cfg).is_err());
        assert!(propagate(&pot, 0.0, 1.0, &[0.1, 0.2], &cfg).is_err());
        assert!(propagate(&pot, 0.0, 1.0, &[0.0, 0.2, 0.2], &cfg).is_err());
        assert!(IntegratorConfig::new(0.0f64).is_err());
    }

    #[test]
    fn substeps_hit_output_times_exactly() {
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let cfg = IntegratorConfig::new(0.3).unwrap();
        let times = [0.0, 0.25, 1.0, 1.7];
        let s = propagate(&pot, 1.0, 0.0, &times, &cfg).unwrap();
        for (st, t) in s.iter().zip(times) {
            assert_eq!(st.t, t);
        }
    }

    #[test]
    fn escape_reports_last_valid_state() {
        // an inverted-energy Baranger orbit launched far out overflows cosh
        let pot = Potential::baranger(1.0, 1.0, 5.0, 1.0).unwrap();
        let cfg = IntegratorConfig::new(1e-3).unwrap();
        let err = propagate(&pot, 0.0, 1.0e30, &[0.0, 1.0], &cfg).unwrap_err();
        match err {
            Error::Escaped { last } => assert!(last.q.is_finite() && last.t >= 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn time_reversible() {
        let pot = Potential::morse(1.0, 30.0, 0.08).unwrap();
        let cfg = IntegratorConfig::default_for(&pot);
        let (q0, p0) = (0.7f64, 2.0f64);
        let fwd = propagate(&pot, q0, p0, &[0.0, 40.0], &cfg).unwrap()[1];
        let back = propagate(&pot, fwd.q, -fwd.p, &[0.0, 40.0], &cfg).unwrap()[1];
        assert!((back.q - q0).abs() < 1e-6 && (back.p + p0).abs() < 1e-6);
    }
}
