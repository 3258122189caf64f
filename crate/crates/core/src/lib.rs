//! Simulator and library for covert routing in heterogeneous multi-modality
//! wireless networks.
//!
//! A source must reach a destination through relays while an adversary
//! (Willie) runs an energy detector on every hop. Each transmitter picks both
//! a next hop and a communication modality. The crate provides:
//!
//! - [`scenario`]: scene description (nodes, obstacles, modalities, physical
//!   parameters) and its on-disk format.
//! - [`channel`]: synthetic log-distance propagation with obstruction and
//!   shadowing terms, plus ingestion of externally measured gain tables.
//! - [`metrics`]: closed-form detection error probability (DEP) of the
//!   optimal-threshold radiometer, per-hop and end-to-end throughput, and a
//!   Monte Carlo detection oracle.
//! - [`topology`]: per-node state/action spaces and the throughput-feasible
//!   link graph.
//! - [`qlearn`]: decentralized Q-learning route/modality selection driven by
//!   local feedback.
//! - [`oracle`]: centralized Dijkstra optimum, an exhaustive brute-force
//!   verifier, and two geometric baseline heuristics.
//! - [`harness`]: experiment runner producing deterministic CSV records for
//!   single runs and parameter sweeps.
//!
//! All randomness flows through explicit 64-bit seeds; identical inputs give
//! identical outputs, byte for byte.

pub mod channel;
pub mod gamma;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod qlearn;
pub mod scenario;
pub mod topology;

pub use channel::{build_gain_table, load_gain_table, segment_obstruction_count, GainTable};
pub use geometry::Point3;
pub use metrics::{DetectionParams, Hop, Route};
pub use scenario::{Modality, ModalityId, NodeDef, NodeId, Obstacle, Scenario};
