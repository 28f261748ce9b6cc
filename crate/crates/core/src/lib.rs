//! Steady-state optics of a charged quantum-dot spin in a microcavity.
//!
//! Two independent routes to the reflection and transmission coefficients
//! of a hot (QD-coupled) or cold (uncoupled) cavity are provided:
//!
//! * [`semiclassical`]: closed-form coefficients with the QD population
//!   solved self-consistently, including every branch of the bistable
//!   response.
//! * [`liouvillian`]: the driven Jaynes-Cummings master equation on a
//!   truncated Fock space, solved for its steady state.
//!
//! [`spectra`] sweeps both over detuning and power and extracts the
//! Faraday-rotation, saturation and dressed-state observables built on
//! top of them.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod linalg;
pub mod liouvillian;
pub mod operators;
pub mod params;
pub mod semiclassical;
pub mod spectra;

pub use error::Error;
pub use num_complex::Complex64 as C64;
pub use params::{Drive, SystemParams, Topology};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T, E = Error> = core::result::Result<T, E>;
