//! Agent-based simulation of emotional bloggers on an evolving bipartite
//! agent–post network, plus the tools to analyze what it produces.
//!
//! * [`model`]: agents, posts, events and the bipartite graph.
//! * [`dynamics`]: the arousal/valence maps and the fields that drive them.
//! * [`sim`]: the time-stepped rules and run configuration.
//! * [`infer`]: estimating model inputs from an event log.
//! * [`analysis`]: time series, power spectra, degree statistics, circumplex maps.
//! * [`communities`]: projection, normalized Laplacian, spectral communities.

pub mod analysis;
pub mod communities;
pub mod dist;
pub mod dynamics;
pub mod error;
pub mod event_log;
pub mod infer;
pub mod model;
pub mod sim;

pub use dist::DiscreteDist;
pub use dynamics::MapParams;
pub use error::{Error, Result};
pub use model::{
    AgentId, BipartiteGraph, CommentEvent, EmotionState, EventKind, Network, Partition, PostId, TimeBin,
    ValenceClass,
};
