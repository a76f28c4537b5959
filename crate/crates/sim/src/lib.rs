//! Seeded Monte Carlo sweeps over the joint precoding and IRS optimizer,
//! with CSV tables and SVG charts.

pub mod aggregate;
pub mod chart;
pub mod error;
pub mod output;
pub mod schemes;
pub mod seeds;
pub mod spec;
pub mod suite;
pub mod sweep;

pub use error::{Error, Result};
pub use spec::{ExperimentSpec, Preset, Scheme};
pub use sweep::{run_sweep, SweepResult};
