//! The agent-based simulator.

pub mod config;
pub mod driving;
pub mod engine;
mod sampler;

pub use config::{DistSource, Driving, NoiseSpec, SimConfig, SyntheticDriving};
pub use driving::{long_memory_noise, synthesize_driving};
pub use engine::{run, SimOutput, Simulation, StepReport};
