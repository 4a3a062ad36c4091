//! Benchmark harness for parity-encoded spin systems.
//!
//! An all-to-all logical Ising problem ([`instances`]) is embedded three
//! ways: parity encoding with weight-4 plaquette checks or weight-3 triad
//! checks ([`parity`]) and a Chimera minor embedding ([`embedding`]). A
//! rejection-free Metropolis sampler ([`sampler`]) draws readouts, which
//! can be decoded back to logical states ([`decoders`]). [`experiments`]
//! estimates the probability that `M` samples contain the logical ground
//! state, for random and sampled readouts, with and without decoding.

pub mod cli;
pub mod decoders;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod parity;

pub mod sampler;
pub mod spin;

pub use error::{Error, Result};
pub use instances::{GroundTruth, LogicalProblem};
pub use sampler::{EnergyModel, Scheme};
pub use spin::SpinConfig;
