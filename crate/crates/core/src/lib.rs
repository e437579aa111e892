//! Semiclassical coherent-state initial value representations in one
//! dimension, with an exact split-operator reference.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the
//! tolerances in the test suite assume.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod gaussian;
pub mod ivr;
pub mod potentials;
pub mod quadrature;
pub mod quantum;
mod scalar;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::{Cplx, Real};

pub type Potential64 = potentials::Potential<f64>;
pub type GaussianState64 = gaussian::GaussianState<f64>;
pub type SpatialGrid64 = gaussian::SpatialGrid<f64>;
pub type TrajectoryState64 = classical::TrajectoryState<f64>;
pub type Monodromy64 = classical::Monodromy<f64>;
pub type IntegratorConfig64 = classical::IntegratorConfig<f64>;
pub type MethodSpec64 = ivr::MethodSpec<f64>;
pub type EnsembleConfig64 = ivr::EnsembleConfig<f64>;
pub type CorrelationSeries64 = ivr::CorrelationSeries<f64>;
pub type GridSpec64 = quantum::GridSpec<f64>;
pub type Complex64 = Complex<f64>;
