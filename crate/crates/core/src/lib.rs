//! Teleportation-assisted sensing with GHZ blocks under low-frequency
//! dephasing.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the shared scalar types,
//! * [`channels`] evolves a block's coherence (with a dense oracle),
//! * [`protocol`] turns a cycle into a frequency uncertainty,
//! * [`optimizer`] finds optimal knobs per noise regime,
//! * [`env`] simulates a classical environment with finite correlation time,
//! * [`swap`] simulates the frequency-tuned swap chain on a small register.

pub mod channels;
pub mod env;
pub mod optimizer;
pub mod params;
pub mod protocol;
pub mod rng;
pub mod swap;

pub use params::{BlockCoherence, ParamError, ProtocolParams, SensitivityResult};
