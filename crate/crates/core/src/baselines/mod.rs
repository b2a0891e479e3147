//! Tempering baselines: parallel tempering, simulated tempering and annealed
//! importance sampling, all driven by the same HMC kernel as the main sampler.

mod ais;
mod ladder;
mod pt;
mod st;

pub use ais::{annealed_importance_sampling, AisRun, Bridge};
pub use ladder::{TemperatureLadder, MIN_TEMPERING_BETA};
pub use pt::{parallel_tempering, swap_log_ratio, PtRun};
pub use st::{simulated_tempering, simulated_tempering_with, RungKernel, StRun, StTrace};
