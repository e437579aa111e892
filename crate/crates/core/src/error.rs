use thiserror::Error;

use crate::classical::TrajectoryState;

/// Errors reported by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("potential evaluation out of floating-point range at x = {x}")]
    OutOfRange { x: f64 },

    #[error("energy {energy} is not above the potential minimum {minimum}")]
    BelowMinimum { energy: f64, minimum: f64 },

    #[error("motion at energy {energy} is unbound (dissociation threshold {threshold})")]
    Unbound { energy: f64, threshold: f64 },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("trajectory left the representable region at t = {}; last valid state q = {}, p = {}", .last.t, .last.q, .last.p)]
    Escaped { last: Box<TrajectoryState<f64>> },

    #[error("singular width/prefactor denominator (|d| = {magnitude:e})")]
    Singular { magnitude: f64 },

    #[error("prefactor branch ambiguous at t = {t}: the radicand passed too close to zero within one tracking step, reduce dt")]
    BranchAmbiguity { t: f64 },

    #[error("grid [{x_min}, {x_max}] does not cover a Gaussian centred at {center} with width {sigma}")]
    Coverage {
        x_min: f64,
        x_max: f64,
        center: f64,
        sigma: f64,
    },

    #[error("wavefunction reached the grid edge at t = {t} (edge amplitude {amplitude:e})")]
    GridTooSmall { t: f64, amplitude: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
