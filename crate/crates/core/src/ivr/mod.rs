//! Coherent-state initial value representations of the propagator and
//! the Monte Carlo evaluation of autocorrelation functions.
//!
//! All variants share one estimator,
//!
//! ```text
//! c(t) = \int dq dp / (2 pi hbar) <g(p0,q0)|g_{gamma1}(p_t,q_t)> R e^{iS/hbar} <g(p_i,q_i)|g(p0,q0)>
//! ```
//!
//! and differ only in the final width `gamma1(t)` and the prefactor `R(t)`:
//!
//! | variant | `gamma1` | `R` |
//! |---|---|---|
//! | Herman-Kluk | `gamma` | general form with `gamma1 = gamma2 = gamma` |
//! | thawed (TGA) | from the true monodromy | `(gamma/Re gamma1)^{1/4} (M_qq + i hbar gamma M_qp)^{-1/2}` |
//! | root TGA(n) | principal `n`-th root of the thawed width | general form |
//! | global harmonic TGA | squeezed width at `omega(E)` | thawed form with harmonic monodromy |

mod ensemble;
mod prefactor;
mod sampling;
mod width;

pub use ensemble::{
    autocorrelation, norm_series, width_diagnostic, CorrelationSeries, CoveragePolicy,
    Diagnostics, Ensemble, EnsembleConfig, NormGrid, TrajectoryContribution, WidthDiagnostic,
};
pub use prefactor::{
    general_radicand, hk_radicand, prefactor_general, prefactor_hk, prefactor_tga,
    tga_denominator, Branch,
};
pub use sampling::{sample_initial_conditions, PhaseSpaceSample, Sampler, SamplingDensity};
pub use width::{root_width, squeezed_width, tga_width};

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which semiclassical propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    HermanKluk,
    Thawed,
    /// Thawed width replaced by its principal root of the given even order.
    RootThawed(u32),
    GlobalHarmonic,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::HermanKluk => write!(f, "hk"),
            Variant::Thawed => write!(f, "tga"),
            Variant::RootThawed(n) => write!(f, "root-tga-{n}"),
            Variant::GlobalHarmonic => write!(f, "gh-tga"),
        }
    }
}

impl Variant {
    pub fn validate(&self) -> Result<()> {
        match self {
            Variant::RootThawed(n) if *n < 2 || n % 2 != 0 => Err(Error::Invalid(format!(
                "root order must be even and at least 2, got {n}"
            ))),
            _ => Ok(()),
        }
    }
}

/// A propagator variant together with its reference width and `hbar`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodSpec<T> {
    pub variant: Variant,
    pub gamma: T,
    pub hbar: T,
}

impl<T: Real> MethodSpec<T> {
    pub fn new(variant: Variant, gamma: T, hbar: T) -> Result<Self> {
        variant.validate()?;
        if !(gamma > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::Invalid(format!(
                "method needs gamma > 0 and hbar > 0, got {gamma}, {hbar}"
            )));
        }
        Ok(Self {
            variant,
            gamma,
            hbar,
        })
    }
}
