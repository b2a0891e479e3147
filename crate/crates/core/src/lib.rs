//! Pseudo-extended Markov chain Monte Carlo.
//!
//! The crate provides target densities, the pseudo-extended and tempered
//! pseudo-extended augmentations, a Hamiltonian Monte Carlo kernel with NUTS,
//! tempering baselines and an experiment harness.

pub mod baselines;
pub mod boltzmann;
pub mod checks;
pub mod error;
pub mod extended;
pub mod harness;
pub mod hmc;
pub mod math;
pub mod rng;
pub mod targets;

pub use error::{Error, Result};
