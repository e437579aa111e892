//! Comparison reports, Monte Carlo convergence tables and width diagnostics.

use std::fmt::Write as _;

use ivr_core::ivr::{width_diagnostic, Ensemble, WidthDiagnostic};
use ivr_core::Complex64;
use serde::Serialize;

use crate::config::{ExperimentConfig, MethodChoice};
use crate::error::{HarnessError, Result};
use crate::experiment::MethodSeries;

/// `(max_t, rms_t)` of `| |a(t)| - |b(t)| |`.
pub fn deviation(a: &[Complex64], b: &[Complex64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).abs()).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
    (max, rms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodMetrics {
    pub method: String,
    pub max_deviation: f64,
    pub rms_deviation: f64,
    /// `max_t |norm(t) - 1|`, absent when no norm was computed.
    pub norm_deviation: Option<f64>,
    pub trajectories: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub baseline: String,
    /// Ranked by RMS deviation, best first.
    pub methods: Vec<MethodMetrics>,
}

pub fn compare(series: &[MethodSeries], baseline: MethodChoice) -> Result<ComparisonReport> {
    let base = series
        .iter()
        .find(|s| s.method == baseline)
        .ok_or_else(|| HarnessError::Input(format!("run has no {baseline} series to compare against")))?;
    let mut methods = Vec::with_capacity(series.len());
    for s in series {
        if s.times != base.times {
            return Err(HarnessError::Input(format!(
                "{} and {baseline} are not on the same output time grid",
                s.method
            )));
        }
        let (max_deviation, rms_deviation) = deviation(&s.c, &base.c);
        let norm_deviation = s
            .norm
            .iter()
            .filter(|x| !x.is_nan())
            .map(|x| (x - 1.0).abs())
            .reduce(f64::max);
        methods.push(MethodMetrics {
            method: s.method.to_string(),
            max_deviation,
            rms_deviation,
            norm_deviation,
            trajectories: s.trajectories,
            wall_seconds: s.wall_seconds,
        });
    }
    methods.sort_by(|a, b| a.rms_deviation.total_cmp(&b.rms_deviation));
    Ok(ComparisonReport {
        baseline: baseline.to_string(),
        methods,
    })
}

impl ComparisonReport {
    pub fn text(&self) -> String {
        let mut s = format!("deviation of |c(t)| from {}\n", self.baseline);
        writeln!(
            s,
            "{:<4} {:<14} {:>12} {:>12} {:>12} {:>8} {:>10}",
            "rank", "method", "rms", "max", "norm dev", "N", "wall [s]"
        )
        .unwrap();
        for (i, m) in self.methods.iter().enumerate() {
            let norm = m.norm_deviation.map_or("-".to_string(), |x| format!("{x:.3e}"));
            writeln!(
                s,
                "{:<4} {:<14} {:>12.4e} {:>12.4e} {:>12} {:>8} {:>10.2}",
                i + 1,
                m.method,
                m.rms_deviation,
                m.max_deviation,
                norm,
                m.trajectories,
                m.wall_seconds
            )
            .unwrap();
        }
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn get(&self, method: &str) -> Option<&MethodMetrics> {
        self.methods.iter().find(|m| m.method == method)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub trajectories: usize,
    pub method: String,
    /// RMS over t of `| |c_N| - |c_Nmax| |`.
    pub rms_change: f64,
    pub mean_mc_error: f64,
    pub max_mc_error: f64,
}

/// Runs the semiclassical methods of `cfg` once with `max(sizes)` trajectories
/// and tabulates every prefix against the largest.
pub fn converge(cfg: &ExperimentConfig, sizes: &[usize], threads: Option<usize>) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 || sizes[0] == 0 {
        return Err(HarnessError::Config("--n-list needs at least two distinct positive sizes".into()));
    }
    let variants: Vec<_> = cfg.semiclassical().collect();
    if variants.is_empty() {
        return Err(HarnessError::Config("converge needs at least one semiclassical method".into()));
    }
    let potential = cfg.potential()?;
    let ensemble = Ensemble::new(
        &potential,
        cfg.initial_state()?,
        &variants,
        cfg.times(),
        cfg.ensemble_config(&potential, threads),
    )?;
    let snaps = ensemble.run_prefixes(&sizes, cfg.sampling.seed)?;
    let reference = snaps.last().expect("two sizes");
    let mut rows = Vec::new();
    for (n, snap) in sizes.iter().zip(&snaps) {
        for (s, r) in snap.iter().zip(reference) {
            rows.push(ConvergenceRow {
                trajectories: *n,
                method: MethodChoice::Semiclassical(s.method.variant).to_string(),
                rms_change: deviation(&s.c, &r.c).1,
                mean_mc_error: s.mc_error.iter().sum::<f64>() / s.mc_error.len() as f64,
                max_mc_error: s.mc_error.iter().copied().fold(0.0, f64::max),
            });
        }
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,method,rms_change,mean_mc_error,max_mc_error\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{:.16e},{:.16e},{:.16e}",
            r.trajectories, r.method, r.rms_change, r.mean_mc_error, r.max_mc_error
        )
        .unwrap();
    }
    s
}

/// Width diagnostic along the trajectory from `(qi, pi)` on the config's time grid.
pub fn diagnose_width(cfg: &ExperimentConfig, qi: f64, pi: f64) -> Result<WidthDiagnostic<f64>> {
    let potential = cfg.potential()?;
    Ok(width_diagnostic(
        &potential,
        qi,
        pi,
        cfg.state.gamma,
        cfg.state.hbar,
        &cfg.times(),
        &cfg.integrator(&potential),
    )?)
}

pub fn width_csv(d: &WidthDiagnostic<f64>) -> String {
    let mut s = String::from("t,re_gamma1,re_sqrt_gamma1,re_fourth_root_gamma1\n");
    for k in 0..d.times.len() {
        writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            d.times[k], d.re_width[k], d.re_sqrt[k], d.re_fourth_root[k]
        )
        .unwrap();
    }
    s
}

/// Fraction of `times >= from` at which `values < 0.1 * reference`.
pub fn small_fraction(times: &[f64], values: &[f64], reference: f64, from: f64) -> f64 {
    let late: Vec<usize> = (0..times.len()).filter(|&k| times[k] >= from).collect();
    let hits = late.iter().filter(|&&k| values[k] < 0.1 * reference).count();
    hits as f64 / late.len().max(1) as f64
}
