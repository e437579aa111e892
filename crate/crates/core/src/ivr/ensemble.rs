use num_complex::Complex;
use rayon::prelude::*;

use super::prefactor::{general_radicand, hk_radicand, tga_denominator, Branch};
use super::sampling::{Sampler, SamplingDensity};
use super::width::{root_width, squeezed_width, tga_width};
use super::{MethodSpec, Variant};
use crate::classical::{
    harmonic_monodromy, propagate_observed, validate_times, Checkpoint, IntegratorConfig,
    Monodromy, TrajectoryState,
};
use crate::error::{Error, Result};
use crate::gaussian::{accumulate, overlap, GaussianState, SpatialGrid};
use crate::potentials::{ActionAngle, Potential};
use crate::scalar::Real;

/// What to do with Gaussians that reach past the norm grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoveragePolicy {
    /// Any centre closer than six widths to an edge is an error.
    Strict,
    /// Off-grid tails are dropped; offending terms are counted in [`Diagnostics`].
    #[default]
    Truncate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormGrid<T> {
    pub grid: SpatialGrid<T>,
    pub policy: CoveragePolicy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig<T> {
    pub integrator: IntegratorConfig<T>,
    /// Branch tracking every `track_stride` integrator substeps (and at every output).
    /// Coarser strides are cheaper but can skip fast turns of the radicand.
    pub track_stride: usize,
    pub sampling: SamplingDensity,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Trajectories processed per parallel batch. Does not affect results.
    pub batch: usize,
}

impl<T: Real> EnsembleConfig<T> {
    pub fn new(integrator: IntegratorConfig<T>) -> Self {
        Self {
            integrator,
            track_stride: 1,
            sampling: SamplingDensity::Magnitude,
            threads: None,
            batch: 64,
        }
    }
}

/// Per-run bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Global-harmonic samples outside bound motion that used the true monodromy instead.
    pub harmonic_fallbacks: usize,
    /// Gaussian terms (trajectory x output time) not fully inside the norm grid.
    pub uncovered_terms: usize,
}

/// Monte Carlo autocorrelation estimate for one method.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries<T> {
    pub method: MethodSpec<T>,
    pub times: Vec<T>,
    pub c: Vec<Complex<T>>,
    /// `\int |Psi|^2 dx` of the reconstructed wavefunction, when a norm grid was given.
    pub norm: Option<Vec<T>>,
    /// Standard error of the complex mean, `sqrt(se_re^2 + se_im^2)`.
    pub mc_error: Vec<T>,
    pub n_trajectories: usize,
    pub seed: u64,
    pub diagnostics: Diagnostics,
}

/// Everything one trajectory contributes to one method at one output time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryContribution<T> {
    pub state: TrajectoryState<T>,
    /// Stability matrix the prefactor was built from (harmonic for the global-harmonic variant).
    pub monodromy: Monodromy<T>,
    pub width: Complex<T>,
    pub prefactor: Complex<T>,
    pub weight: T,
    /// `<g(p_i,q_i)|g(p0,q0)>`.
    pub initial_overlap: Complex<T>,
    /// Whether the global-harmonic variant fell back to the true monodromy.
    pub fallback: bool,
}

impl<T: Real> TrajectoryContribution<T> {
    /// `R e^{iS/hbar} <g_i|g_0> w`, the coefficient of the final Gaussian.
    pub fn coefficient(&self, hbar: T) -> Complex<T> {
        let phase = Complex::from_polar(T::one(), self.state.action / hbar);
        self.prefactor * phase * self.initial_overlap * self.weight
    }

    pub fn final_state(&self, hbar: T) -> GaussianState<T> {
        GaussianState {
            q: self.state.q,
            p: self.state.p,
            width: self.width,
            hbar,
        }
    }
}

/// Width and prefactor evolution of one variant along one trajectory.
struct Track<T> {
    variant: Variant,
    omega: Option<T>,
    fallback: bool,
    branch: Branch<T>,
}

impl<T: Real> Track<T> {
    /// Whether this track reads the thawed width at substeps (`false`) or
    /// only at outputs (`true`).
    fn thawed_width_use(&self) -> Option<bool> {
        match (self.variant, self.omega) {
            (Variant::RootThawed(_), _) => Some(false),
            (Variant::Thawed, _) | (Variant::GlobalHarmonic, None) => Some(true),
            _ => None,
        }
    }

    /// Continues the branch to `state`; at outputs also returns the monodromy
    /// the variant uses, the final width and the prefactor. `thawed` is the
    /// thawed width of `state` when some track needs it.
    fn step(
        &mut self,
        state: &TrajectoryState<T>,
        thawed: Option<Complex<T>>,
        output: bool,
        gamma: T,
        hbar: T,
        mass: T,
    ) -> Result<Option<(Monodromy<T>, Complex<T>, Complex<T>)>> {
        let m = state.monodromy;
        let t = state.t;
        let real = |x: T| Complex::new(x, T::zero());
        let thawed = || thawed.map_or_else(|| tga_width(&m, gamma, hbar), Ok);
        let (used, width, radicand) = match (self.variant, self.omega) {
            (Variant::HermanKluk, _) => (m, real(gamma), hk_radicand(&m, gamma, hbar)),
            (Variant::RootThawed(n), _) => {
                let w = root_width(thawed()?, n);
                (m, w, general_radicand(&m, w, real(gamma), hbar))
            }
            (Variant::GlobalHarmonic, Some(omega)) => {
                let mh = harmonic_monodromy(omega, mass, t);
                let w = if output {
                    squeezed_width(omega, mass, gamma, hbar, t)
                } else {
                    real(gamma)
                };
                (mh, w, tga_denominator(&mh, gamma, hbar))
            }
            (Variant::Thawed, _) | (Variant::GlobalHarmonic, None) => {
                let w = if output { thawed()? } else { real(gamma) };
                (m, w, tga_denominator(&m, gamma, hbar))
            }
        };
        if !output {
            self.branch.follow(radicand, t)?;
            return Ok(None);
        }
        let root = self.branch.sqrt(radicand, t)?;
        let prefactor = match (self.variant, self.omega) {
            (Variant::HermanKluk, _) | (Variant::RootThawed(_), _) => root,
            _ => root.inv() * (gamma / width.re).sqrt().sqrt(),
        };
        Ok(Some((used, width, prefactor)))
    }
}

/// Output of one trajectory: per method, per output time.
struct TrajectoryOutput<T> {
    contributions: Vec<Vec<Complex<T>>>,
    terms: Vec<Vec<(Complex<T>, GaussianState<T>)>>,
    fallbacks: usize,
}

struct Accumulator<T> {
    sum: Vec<Vec<Complex<T>>>,
    sum_sq: Vec<Vec<(T, T)>>,
    psi: Vec<Vec<Complex<T>>>,
    count: usize,
    fallbacks: usize,
    uncovered: Vec<usize>,
}

/// A trajectory ensemble shared by several propagator variants.
///
/// Every variant is evaluated on the same sampled initial conditions, so
/// differences between methods are not masked by sampling noise. Sample `k`
/// is drawn from a random stream derived from `(seed, k)` and contributions
/// are reduced in index order, so results do not depend on the number of
/// threads and a run with `n` trajectories is a prefix of any larger run.
pub struct Ensemble<'a, T> {
    potential: &'a Potential<T>,
    initial: GaussianState<T>,
    gamma: T,
    variants: Vec<Variant>,
    times: Vec<T>,
    config: EnsembleConfig<T>,
    norm: Option<NormGrid<T>>,
    action_angle: ActionAngle<T>,
}

impl<'a, T: Real> Ensemble<'a, T> {
    /// `initial` must have a real width; it is also the reference width of every variant.
    pub fn new(
        potential: &'a Potential<T>,
        initial: GaussianState<T>,
        variants: &[Variant],
        times: Vec<T>,
        config: EnsembleConfig<T>,
    ) -> Result<Self> {
        if initial.width.im != T::zero() {
            return Err(Error::Invalid(
                "the initial Gaussian must have a real width".into(),
            ));
        }
        if variants.is_empty() {
            return Err(Error::Invalid("no propagator variants requested".into()));
        }
        for v in variants {
            v.validate()?;
        }
        validate_times(&times)?;
        if config.batch == 0 {
            return Err(Error::Invalid("batch size must be positive".into()));
        }
        Ok(Self {
            potential,
            gamma: initial.width.re,
            initial,
            variants: variants.to_vec(),
            times,
            config,
            norm: None,
            action_angle: ActionAngle::default(),
        })
    }

    /// Also reconstruct `Psi(x, t)` on `grid` and report its norm.
    pub fn with_norm(mut self, grid: NormGrid<T>) -> Self {
        self.norm = Some(grid);
        self
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn method(&self, variant: Variant) -> MethodSpec<T> {
        MethodSpec {
            variant,
            gamma: self.gamma,
            hbar: self.initial.hbar,
        }
    }

    fn sampler(&self) -> Sampler<T> {
        Sampler {
            q0: self.initial.q,
            p0: self.initial.p,
            gamma: self.gamma,
            hbar: self.initial.hbar,
            density: self.config.sampling,
        }
    }

    /// Follows trajectory `index` and hands every per-method, per-output
    /// contribution to `emit(method_index, output_index, contribution)`.
    pub fn trace<F>(&self, seed: u64, index: u64, mut emit: F) -> Result<()>
    where
        F: FnMut(usize, usize, &TrajectoryContribution<T>),
    {
        let hbar = self.initial.hbar;
        let gamma = self.gamma;
        let mass = self.potential.mass();
        let sample = self.sampler().draw(seed, index);
        let start = GaussianState {
            q: sample.q,
            p: sample.p,
            width: self.initial.width,
            hbar,
        };
        let initial_overlap = overlap(&start, &self.initial)?;

        let mut omega = None;
        let mut fallback = false;
        if self.variants.contains(&Variant::GlobalHarmonic) {
            let energy = self.potential.energy(sample.q, sample.p)?;
            match self.action_angle.frequency(self.potential, energy) {
                Ok(f) => omega = Some(f.omega),
                Err(Error::Unbound { .. }) | Err(Error::BelowMinimum { .. }) => fallback = true,
                Err(e) => return Err(e),
            }
        }
        let mut tracks: Vec<Track<T>> = self
            .variants
            .iter()
            .map(|&variant| {
                let gh = variant == Variant::GlobalHarmonic;
                Track {
                    variant,
                    omega: if gh { omega } else { None },
                    fallback: gh && fallback,
                    branch: Branch::new(),
                }
            })
            .collect();

        propagate_observed(
            self.potential,
            sample.q,
            sample.p,
            &self.times,
            &self.config.integrator,
            self.config.track_stride,
            |state, checkpoint| {
                let output = matches!(checkpoint, Checkpoint::Output(_));
                let needed = tracks
                    .iter()
                    .any(|tr| tr.thawed_width_use().is_some_and(|at_output| output || !at_output));
                let thawed = if needed {
                    Some(tga_width(&state.monodromy, gamma, hbar)?)
                } else {
                    None
                };
                for (m, track) in tracks.iter_mut().enumerate() {
                    let step = track.step(state, thawed, output, gamma, hbar, mass)?;
                    if let (Checkpoint::Output(k), Some((monodromy, width, prefactor))) = (checkpoint, step) {
                        emit(
                            m,
                            k,
                            &TrajectoryContribution {
                                state: *state,
                                monodromy,
                                width,
                                prefactor,
                                weight: sample.weight,
                                initial_overlap,
                                fallback: track.fallback,
                            },
                        );
                    }
                }
                Ok(())
            },
        )
    }

    fn trajectory(&self, seed: u64, index: u64) -> Result<TrajectoryOutput<T>> {
        let n_methods = self.variants.len();
        let n_times = self.times.len();
        let hbar = self.initial.hbar;
        let keep_terms = self.norm.is_some();
        let zero = Complex::new(T::zero(), T::zero());
        let mut contributions = vec![vec![zero; n_times]; n_methods];
        let mut terms = if keep_terms {
            vec![Vec::with_capacity(n_times); n_methods]
        } else {
            Vec::new()
        };
        let mut fallback = false;
        let mut failure = None;
        self.trace(seed, index, |m, k, contribution| {
            let coefficient = contribution.coefficient(hbar);
            let ket = contribution.final_state(hbar);
            fallback |= contribution.fallback;
            match overlap(&self.initial, &ket) {
                Ok(o) => contributions[m][k] = o * coefficient,
                Err(e) => failure = Some(e),
            }
            if keep_terms {
                terms[m].push((coefficient, ket));
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(TrajectoryOutput {
            contributions,
            terms,
            fallbacks: usize::from(fallback),
        })
    }

    /// Runs `n` trajectories.
    pub fn run(&self, n: usize, seed: u64) -> Result<Vec<CorrelationSeries<T>>> {
        Ok(self.run_prefixes(&[n], seed)?.pop().expect("one snapshot"))
    }

    /// Runs `max(sizes)` trajectories and reports the estimate after each
    /// requested prefix size. The result for size `n` is bit-identical to
    /// `run(n, seed)`. Outer index follows `sizes` order.
    pub fn run_prefixes(
        &self,
        sizes: &[usize],
        seed: u64,
    ) -> Result<Vec<Vec<CorrelationSeries<T>>>> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Invalid("trajectory counts must be positive".into()));
        }
        let work = || self.run_inner(sizes, seed);
        match self.config.threads {
            Some(threads) => rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Invalid(format!("cannot build thread pool: {e}")))?
                .install(work),
            None => work(),
        }
    }

    fn run_inner(&self, sizes: &[usize], seed: u64) -> Result<Vec<Vec<CorrelationSeries<T>>>> {
        let n_methods = self.variants.len();
        let n_times = self.times.len();
        let total = *sizes.iter().max().expect("non-empty");
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = Accumulator {
            sum: vec![vec![zero; n_times]; n_methods],
            sum_sq: vec![vec![(T::zero(), T::zero()); n_times]; n_methods],
            psi: match &self.norm {
                Some(g) => vec![vec![zero; g.grid.n_points]; n_methods * n_times],
                None => Vec::new(),
            },
            count: 0,
            fallbacks: 0,
            uncovered: vec![0; n_methods],
        };
        let mut snapshots: Vec<Option<Vec<CorrelationSeries<T>>>> = vec![None; sizes.len()];

        let mut start = 0;
        while start < total {
            let end = (start + self.config.batch).min(total);
            let outputs: Vec<TrajectoryOutput<T>> = (start..end)
                .into_par_iter()
                .map(|k| self.trajectory(seed, k as u64))
                .collect::<Result<_>>()?;

            // sizes falling inside this batch need the reduction split there
            let mut cut = start;
            while cut < end {
                let next = sizes
                    .iter()
                    .copied()
                    .filter(|&s| s > cut && s <= end)
                    .min()
                    .unwrap_or(end);
                self.reduce(&mut acc, &outputs[cut - start..next - start])?;
                for (slot, &size) in snapshots.iter_mut().zip(sizes) {
                    if size == next {
                        *slot = Some(self.snapshot(&acc, seed));
                    }
                }
                cut = next;
            }
            start = end;
        }
        Ok(snapshots
            .into_iter()
            .map(|s| s.expect("every size reached"))
            .collect())
    }

    fn reduce(&self, acc: &mut Accumulator<T>, outputs: &[TrajectoryOutput<T>]) -> Result<()> {
        for out in outputs {
            for (m, series) in out.contributions.iter().enumerate() {
                for (k, z) in series.iter().enumerate() {
                    acc.sum[m][k] += *z;
                    let sq = &mut acc.sum_sq[m][k];
                    sq.0 += z.re * z.re;
                    sq.1 += z.im * z.im;
                }
            }
            acc.fallbacks += out.fallbacks;
            acc.count += 1;
        }
        if let Some(norm) = &self.norm {
            let grid = norm.grid;
            for out in outputs {
                for (m, terms) in out.terms.iter().enumerate() {
                    for (_, g) in terms {
                        if !grid.covers(g.q, g.sigma()) {
                            if norm.policy == CoveragePolicy::Strict {
                                return Err(Error::Coverage {
                                    x_min: grid.x_min.as_f64(),
                                    x_max: grid.x_max.as_f64(),
                                    center: g.q.as_f64(),
                                    sigma: g.sigma().as_f64(),
                                });
                            }
                            acc.uncovered[m] += 1;
                        }
                    }
                }
            }
            let n_times = self.times.len();
            acc.psi.par_iter_mut().enumerate().for_each(|(slot, psi)| {
                let (m, k) = (slot / n_times, slot % n_times);
                for out in outputs {
                    let (c, g) = &out.terms[m][k];
                    accumulate(psi, &grid, *c, g);
                }
            });
        }
        Ok(())
    }

    fn snapshot(&self, acc: &Accumulator<T>, seed: u64) -> Vec<CorrelationSeries<T>> {
        let n = acc.count;
        let nf = T::from_count(n);
        let dof = T::from_count(n.saturating_sub(1).max(1));
        let n_times = self.times.len();
        self.variants
            .iter()
            .enumerate()
            .map(|(m, &variant)| {
                let diagnostics = Diagnostics {
                    harmonic_fallbacks: if variant == Variant::GlobalHarmonic { acc.fallbacks } else { 0 },
                    uncovered_terms: acc.uncovered[m],
                };
                let c: Vec<Complex<T>> = acc.sum[m].iter().map(|s| s / nf).collect();
                let mc_error = acc.sum[m]
                    .iter()
                    .zip(&acc.sum_sq[m])
                    .map(|(s, &(sre, sim))| {
                        let var_re = ((sre - s.re * s.re / nf) / dof).max(T::zero());
                        let var_im = ((sim - s.im * s.im / nf) / dof).max(T::zero());
                        ((var_re + var_im) / nf).sqrt()
                    })
                    .collect();
                let norm = self.norm.as_ref().map(|g| {
                    (0..n_times)
                        .map(|k| g.grid.norm(&acc.psi[m * n_times + k]) / (nf * nf))
                        .collect()
                });
                CorrelationSeries {
                    method: self.method(variant),
                    times: self.times.clone(),
                    c,
                    norm,
                    mc_error,
                    n_trajectories: n,
                    seed,
                    diagnostics,
                }
            })
            .collect()
    }
}

fn single_method<T: Real>(method: &MethodSpec<T>, initial: &GaussianState<T>) -> Result<()> {
    method.variant.validate()?;
    if initial.width.im != T::zero() || initial.width.re != method.gamma || initial.hbar != method.hbar
    {
        return Err(Error::Invalid(
            "initial state width and hbar must equal the method's gamma and hbar".into(),
        ));
    }
    Ok(())
}

/// Semiclassical autocorrelation `c(t)` of `initial` for one method.
pub fn autocorrelation<T: Real>(
    potential: &Potential<T>,
    method: &MethodSpec<T>,
    initial: &GaussianState<T>,
    times: &[T],
    n: usize,
    seed: u64,
    config: &EnsembleConfig<T>,
) -> Result<CorrelationSeries<T>> {
    single_method(method, initial)?;
    let ensemble = Ensemble::new(potential, *initial, &[method.variant], times.to_vec(), *config)?;
    Ok(ensemble.run(n, seed)?.remove(0))
}

/// Norm of the semiclassically propagated wavefunction reconstructed on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn norm_series<T: Real>(
    potential: &Potential<T>,
    method: &MethodSpec<T>,
    initial: &GaussianState<T>,
    times: &[T],
    n: usize,
    seed: u64,
    grid: NormGrid<T>,
    config: &EnsembleConfig<T>,
) -> Result<Vec<T>> {
    single_method(method, initial)?;
    let ensemble = Ensemble::new(potential, *initial, &[method.variant], times.to_vec(), *config)?
        .with_norm(grid);
    Ok(ensemble
        .run(n, seed)?
        .remove(0)
        .norm
        .expect("norm grid was set"))
}

/// Real parts of the thawed width and of its square and fourth roots along one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct WidthDiagnostic<T> {
    pub times: Vec<T>,
    pub re_width: Vec<T>,
    pub re_sqrt: Vec<T>,
    pub re_fourth_root: Vec<T>,
}

#[allow(clippy::too_many_arguments)]
pub fn width_diagnostic<T: Real>(
    potential: &Potential<T>,
    q: T,
    p: T,
    gamma: T,
    hbar: T,
    times: &[T],
    integrator: &IntegratorConfig<T>,
) -> Result<WidthDiagnostic<T>> {
    let mut out = WidthDiagnostic {
        times: times.to_vec(),
        re_width: Vec::with_capacity(times.len()),
        re_sqrt: Vec::with_capacity(times.len()),
        re_fourth_root: Vec::with_capacity(times.len()),
    };
    propagate_observed(potential, q, p, times, integrator, 0, |state, _| {
        let w = tga_width(&state.monodromy, gamma, hbar)?;
        out.re_width.push(w.re);
        out.re_sqrt.push(root_width(w, 2).re);
        out.re_fourth_root.push(root_width(w, 4).re);
        Ok(())
    })?;
    Ok(out)
}
