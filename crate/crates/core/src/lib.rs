//! Simulation core for quantum key distribution over photon pairs that are
//! entangled in both polarisation and time-bin phase.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; randomised operations take the random source
//! explicitly, and whole sessions are reproducible from a single 64-bit seed.
//!
//! Layout:
//!
//! * [`quantum`]: state vectors, measurement bases, Born-rule measurement and
//!   Haar-random rotations for small dimensions.
//! * [`source`]: the pump superposition, the doubly entangled biphoton state
//!   and the analyser bases used by Alice, Bob and Eve.
//! * [`strategy`]: intercept-resend eavesdropping policies.
//! * [`protocol`]: seeded key-distribution sessions, sifting and XOR keying.
//! * [`info`]: closed-form channel information and per-attack analytics.
//! * [`wigner`]: the three-setting Wigner inequality and interception
//!   thresholds.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod info;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod source;
pub mod stats;
pub mod strategy;
pub mod wigner;

pub use error::{Error, Result};
