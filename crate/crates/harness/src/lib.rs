//! Experiment runner for the semiclassical IVR comparisons: configuration,
//! CSV output, comparison reports, convergence tables and width diagnostics.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{preset, ExperimentConfig, MethodChoice, PRESETS};
pub use error::{HarnessError, Result};
