//! A parallel graph-mining engine built around systematic, duplicate-free
//! subgraph exploration of a single labeled input graph.
//!
//! The library explores connected embeddings (vertex- or edge-induced
//! subgraph instances) in barrier-synchronized supersteps. Applications plug
//! in through a small callback surface — a filter deciding which embeddings
//! survive, a process function emitting outputs, and optional aggregation
//! hooks — while the engine owns enumeration, duplicate elimination via
//! canonical visit orders, compressed frontier storage, cost-balanced work
//! partitioning, and two-level pattern aggregation.
//!
//! Module map:
//!
//! * [`graph`] — immutable labeled input graph and its text loader.
//! * [`embedding`] — embedding values and candidate-extension generation.
//! * [`canonical`] — incremental canonicality checks and canonical orderings.
//! * [`pattern`] — quick patterns, pattern canonization, isomorphism oracle.
//! * [`odag`] — compressed frontier storage, costs, partitioning.
//! * [`engine`] — the superstep executor and aggregation framework.
//! * [`apps`] — frequent subgraph mining, motif counting, clique finding.
//! * [`cli`] — command-line front end used by the `mine` binary.

pub mod apps;
pub mod canonical;
pub mod cli;
pub mod embedding;
pub mod engine;
pub mod graph;
pub mod odag;
pub mod pattern;
