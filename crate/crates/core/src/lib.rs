//! Route statistics and artificial route generation over interface-level
//! internet graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: compressed adjacency, BFS, shortest-path DAGs and uniform
//!   shortest-path sampling.
//! - [`ingest`]: edge-list and trace parsers that intern string labels.
//! - [`synth`]: configuration-model power-law graphs for desk-scale runs.
//! - [`models`]: shortest-path, path-length, random-deviation and node-degree
//!   route models.
//! - [`stats`]: length, hop-direction, degree-evolution and rank-choice
//!   reports, plus whole-graph summaries.
//! - [`report`]: the versioned JSON/CSV report bundle and report comparison.
//! - [`experiment`]: the evaluation harness behind the `routesim` binary.

pub mod graph;
pub mod ingest;
pub mod synth;
pub mod models;
pub mod stats;
pub mod report;
pub mod experiment;
