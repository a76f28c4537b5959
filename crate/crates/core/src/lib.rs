//! Joint MMSE precoding and intelligent reflecting surface (IRS) phase
//! optimization for multi-user MIMO downlinks.
//!
//! The numeric code is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the simulation
//! harness uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alt_opt;
pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod num;
pub mod oracles;
pub mod precoder;
pub mod projectors;
pub mod vamp;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use num::{Complex, Real};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = num::CMat<f64>;
pub type ComplexVector = num::CVec<f64>;
pub type RealVector = num::RVec<f64>;
pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type PhaseVector64 = projectors::PhaseVector<f64>;
pub type BeamformingSolution64 = alt_opt::BeamformingSolution<f64>;
pub type PrecodingSolution64 = precoder::PrecodingSolution<f64>;
