//! Quantum measurement-powered engine cycles on finite-dimensional systems.
//!
//! Operators and states, Kraus channels and their superoperators, peripheral
//! spectra and recurrences, thermodynamic ledgers of engine cycles, and the
//! randomized property suites that check the entropy and no-work results.

pub mod channels;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod operators;
pub mod random;
pub mod sampling;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
