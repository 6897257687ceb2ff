//! Desk-scale engineering toolkit for E-band (71–76 / 81–86 GHz) links.
//!
//! - [`quantities`]: unit-carrying scalars and dB conversions.
//! - [`propagation`]: free-space and NLoS path loss, weather and foliage
//!   attenuation, composed into a link budget.
//! - [`losmimo`]: LoS-MIMO channel matrices for ULA pairs, Gram eigenvalues,
//!   EDOF, Rayleigh distance and effective multiplexing distance.
//! - [`airframe`]: OFDM numerology, frame layout and regional channel plans.
//! - [`coopsim`]: Monte-Carlo simulation of DS/IS user cooperation.

pub mod airframe;
pub mod coopsim;
pub mod eigen;
pub mod error;
pub mod losmimo;
pub mod propagation;
pub mod quantities;
pub mod rng;

pub use error::{Error, Result};

/// Version tag written into every JSON document this crate emits.
pub const SCHEMA_VERSION: u32 = 1;
