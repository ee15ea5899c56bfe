//! Global path planning among moving obstacles with a multi-group particle
//! swarm, plus the simulator, baselines and tuning loop around it.

pub mod baselines;
pub mod cli;
pub mod environment;
pub mod error;
pub mod fitness;
pub mod geometry;
pub mod hsef;
pub mod planner;
pub mod render;
pub mod rng;
pub mod swarm;

pub use error::{Error, Result};
