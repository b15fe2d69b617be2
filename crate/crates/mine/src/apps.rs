//! The three bundled applications, built only on the public callback API.
//!
//! * Frequent subgraph mining (edge-based): aggregates per-pattern domains,
//!   filters by minimum image-based support, outputs frequent embeddings.
//! * Motif counting (vertex-based): exhaustive exploration up to a maximum
//!   size, per-pattern output counts.
//! * Clique finding (vertex-based): local pruning via an incremental
//!   clique check, outputs every clique.

use std::collections::BTreeSet;
use std::fmt;

use crate::embedding::{Embedding, ExplorationMode};
use crate::engine::{AggValue, Application, Ctx};
use crate::graph::{InputGraph, VertexId};
use crate::pattern::SlotMapping;

/// Per-pattern-slot sets of distinct mapped graph vertices; the carrier of
/// minimum image-based support. Slot j collects every vertex mapped to slot
/// j by any isomorphism of any embedding of the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    slots: Vec<BTreeSet<VertexId>>,
}

impl Domain {
    pub fn new(order: usize) -> Self {
        Domain {
            slots: vec![BTreeSet::new(); order],
        }
    }

    pub fn order(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, i: usize) -> &BTreeSet<VertexId> {
        &self.slots[i]
    }

    pub fn insert(&mut self, slot: usize, v: VertexId) {
        self.slots[slot].insert(v);
    }

    /// Minimum image-based support: the smallest slot set size. Zero for an
    /// empty domain.
    pub fn support(&self) -> usize {
        self.slots.iter().map(BTreeSet::len).min().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Domain) {
        debug_assert_eq!(self.slots.len(), other.slots.len());
        for (mine, theirs) in self.slots.iter_mut().zip(&other.slots) {
            mine.extend(theirs.iter().copied());
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "support={} domains=[", self.support())?;
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, v) in slot.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("]")
    }
}

impl AggValue for Domain {
    fn remap_slots(&self, mapping: &SlotMapping) -> Domain {
        let mut out = Domain::new(self.slots.len());
        for (i, slot) in self.slots.iter().enumerate() {
            out.slots[mapping.map(i as u32) as usize] = slot.clone();
        }
        out
    }
}

/// Minimum image-based support of a domain.
pub fn support(d: &Domain) -> usize {
    d.support()
}

/// Frequent subgraph mining with minimum image-based support.
pub struct FsmApp {
    threshold: usize,
    max_edges: Option<usize>,
    mode: ExplorationMode,
}

/// FSM callbacks: φ keeps everything; π aggregates the embedding's domains
/// under its pattern; α keeps embeddings whose pattern reached the support
/// threshold; β outputs the surviving embeddings. The optional size cap is
/// applied through the termination filter.
pub fn fsm_app(threshold: usize, max_size: Option<usize>) -> FsmApp {
    assert!(threshold >= 1, "support threshold must be >= 1");
    FsmApp {
        threshold,
        max_edges: max_size,
        mode: ExplorationMode::EdgeInduced,
    }
}

impl FsmApp {
    pub fn with_mode(mut self, mode: ExplorationMode) -> Self {
        self.mode = mode;
        self
    }

    /// Domains of one embedding: each isomorphism onto its quick pattern
    /// (the visit-order assignment composed with every quick-pattern
    /// automorphism) contributes one vertex per slot.
    fn domains(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) -> Domain {
        let (quick, slot_vertices) = ctx.quick_of(e);
        let automorphisms = ctx.automorphism_group(&quick);
        let mut domain = Domain::new(quick.order());
        for sigma in automorphisms.iter() {
            for (i, &v) in slot_vertices.iter().enumerate() {
                domain.insert(sigma.map(i as u32) as usize, v);
            }
        }
        domain
    }
}

impl Application for FsmApp {
    type MapValue = Domain;
    type OutputValue = i64;

    fn mode(&self) -> ExplorationMode {
        self.mode
    }

    fn filter(&self, _ctx: &mut Ctx<'_, Self>, _e: &Embedding) -> bool {
        true
    }

    fn process(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) {
        let domain = self.domains(ctx, e);
        ctx.map_pattern(e, domain);
    }

    fn aggregation_filter(&self, ctx: &mut Ctx<'_, Self>, _e: &Embedding) -> bool {
        match ctx.read_pattern_aggregate() {
            Some(domain) => domain.support() >= self.threshold,
            None => false,
        }
    }

    fn aggregation_process(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) {
        ctx.output_embedding(e);
    }

    fn termination_filter(&self, _g: &InputGraph, e: &Embedding) -> bool {
        match self.max_edges {
            Some(max) => e.len() < max,
            None => true,
        }
    }

    fn reduce(&self, acc: &mut Domain, value: Domain) {
        acc.merge(&value);
    }

    fn reduce_output(&self, acc: &mut i64, value: i64) {
        *acc += value;
    }
}

/// Motif counting: exhaustive vertex-induced exploration up to `max_size`,
/// counting embeddings per canonical pattern through output aggregation.
pub struct MotifsApp {
    max_size: usize,
    mode: ExplorationMode,
}

pub fn motifs_app(max_size: usize) -> MotifsApp {
    assert!(max_size >= 1, "max size must be >= 1");
    MotifsApp {
        max_size,
        mode: ExplorationMode::VertexInduced,
    }
}

impl MotifsApp {
    pub fn with_mode(mut self, mode: ExplorationMode) -> Self {
        self.mode = mode;
        self
    }
}

impl Application for MotifsApp {
    type MapValue = i64;
    type OutputValue = i64;

    fn mode(&self) -> ExplorationMode {
        self.mode
    }

    fn filter(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) -> bool {
        e.num_vertices(ctx.graph()) <= self.max_size
    }

    fn process(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) {
        ctx.map_output_pattern(e, 1);
    }

    /// Halting at the size cap skips the final step that would generate
    /// every oversized candidate only to filter it out.
    fn termination_filter(&self, g: &InputGraph, e: &Embedding) -> bool {
        e.num_vertices(g) < self.max_size
    }

    fn reduce(&self, acc: &mut i64, value: i64) {
        *acc += value;
    }

    fn reduce_output(&self, acc: &mut i64, value: i64) {
        *acc += value;
    }
}

/// Clique finding: prunes any embedding that is not a clique and outputs
/// the rest, up to `max_size` vertices.
pub struct CliquesApp {
    max_size: usize,
}

pub fn cliques_app(max_size: usize) -> CliquesApp {
    assert!(max_size >= 1, "max size must be >= 1");
    CliquesApp { max_size }
}

impl Application for CliquesApp {
    type MapValue = i64;
    type OutputValue = i64;

    fn mode(&self) -> ExplorationMode {
        ExplorationMode::VertexInduced
    }

    fn filter(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) -> bool {
        is_clique(ctx.graph(), e)
    }

    fn process(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) {
        ctx.output_embedding(e);
    }

    fn termination_filter(&self, _g: &InputGraph, e: &Embedding) -> bool {
        e.len() < self.max_size
    }

    fn reduce(&self, acc: &mut i64, value: i64) {
        *acc += value;
    }

    fn reduce_output(&self, acc: &mut i64, value: i64) {
        *acc += value;
    }
}

/// Incremental clique check: the engine guarantees the parent passed the
/// filter, so only the newly added vertex needs testing against all earlier
/// ones.
pub fn is_clique(g: &InputGraph, e: &Embedding) -> bool {
    debug_assert_eq!(e.mode(), ExplorationMode::VertexInduced);
    let words = e.words();
    match words.split_last() {
        None => true,
        Some((&last, earlier)) => earlier.iter().all(|&w| g.are_adjacent(w, last)),
    }
}
