//! Round-based simulation of cluster routing in wireless sensor networks.
//!
//! The crate models a field of battery-powered sensors reporting to a single
//! base station. Two clustering protocols are provided:
//!
//! - [`lmeec`]: layered multi-hop clustering. Nodes learn their hop distance
//!   to the base station, elect themselves cluster-head from a weight that
//!   mixes degree, residual energy and cluster-head history, members join the
//!   announcement with the greatest weight, and aggregates travel towards the
//!   base station through lower-layer cluster-heads.
//! - [`leach`]: the rotating probabilistic baseline with nearest-head
//!   clusters and single-hop transmission to the base station.
//!
//! [`engine`] drives rounds of configuration, clustering and data transfer
//! against the first-order radio energy model in [`model`], and produces
//! per-round reports plus lifetime marks.

pub mod engine;
pub mod error;
pub mod leach;
pub mod lmeec;
pub mod model;
pub mod topology;

pub use engine::{run_simulation, LifetimeMarks, RoundReport, SimResult, Simulation};
pub use error::ConfigError;
pub use leach::LeachParams;
pub use lmeec::{ClusterSet, RelayTarget, WeightParams, WeightVariant};
pub use model::{
    deploy, deployment_hash, distance, EnergyLedger, EnergyNormalization, Node, NodeId, Position,
    Protocol, RadioEnergyModel, Role, RunUntil, SimConfig,
};
pub use topology::{AdjacencyMap, LayerMap};
