//! Hybrid Gibbs / Metropolis-Hastings sampler with per-iteration cost
//! linear in the total number of data points.

pub mod chain;
pub mod checkpoint;
pub mod config;
pub mod engine;
pub mod metropolis;

pub use chain::{run_chain, run_chain_with, BlockTimings, Chain};
pub use checkpoint::Checkpoint;
pub use config::{ChainConfig, UpdateFlags};
pub use engine::Engine;
pub use metropolis::adapt_proposal_sd;
