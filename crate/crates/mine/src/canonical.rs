//! Coordination-free duplicate elimination.
//!
//! Out of all visit orders of one subgraph (its automorphism class) exactly
//! one is canonical: start at the smallest id, then repeatedly append the
//! smallest-id unvisited neighbor of the visited prefix. The incremental
//! check below accepts an extension `v` of a canonical parent
//! `⟨v_1..v_n⟩` iff the extended sequence is still canonical, which lets the
//! engine prune duplicates candidate-by-candidate with no coordination:
//! every prefix of a canonical sequence is canonical, so pruning a
//! non-canonical sequence prunes all of its extensions at once.
//!
//! The edge-based order is the analogue under the "shares an endpoint"
//! adjacency: the first edge is the minimum id of the embedding and each
//! next edge is the minimum-id unvisited edge touching an earlier one.

use thiserror::Error;

use crate::embedding::{Embedding, ExplorationMode};
use crate::graph::{EdgeId, InputGraph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("id set does not induce a connected subgraph")]
pub struct DisconnectedError;

/// Incremental canonicality check for vertex-based exploration.
///
/// `parent` must be canonical (the engine guarantees this) and `v` a valid
/// extension of it. Rejects if `v` is smaller than the first vertex, then
/// scans the parent in visit order: once the first neighbor of `v` has been
/// seen, any later vertex with id greater than `v` rejects.
pub fn is_canonical_extension(g: &InputGraph, parent: &Embedding, v: VertexId) -> bool {
    is_canonical_extension_counting(g, parent, v).0
}

/// Same check, also reporting how many adjacency probes were made — at most
/// one per parent word.
pub fn is_canonical_extension_counting(
    g: &InputGraph,
    parent: &Embedding,
    v: VertexId,
) -> (bool, usize) {
    debug_assert_eq!(parent.mode(), ExplorationMode::VertexInduced);
    canonical_scan(parent.words(), v, &mut |w| g.are_adjacent(w, v))
}

/// Incremental canonicality check for edge-based exploration; identical
/// structure with "shares an endpoint" in place of vertex adjacency.
pub fn is_canonical_extension_edges(g: &InputGraph, parent: &Embedding, e: EdgeId) -> bool {
    debug_assert_eq!(parent.mode(), ExplorationMode::EdgeInduced);
    canonical_scan(parent.words(), e, &mut |w| g.edges_share_endpoint(w, e))
        .0
}

/// Mode dispatch used by the engine.
pub fn is_canonical_extension_any(g: &InputGraph, parent: &Embedding, id: u32) -> bool {
    match parent.mode() {
        ExplorationMode::VertexInduced => is_canonical_extension(g, parent, id),
        ExplorationMode::EdgeInduced => is_canonical_extension_edges(g, parent, id),
    }
}

fn canonical_scan(
    words: &[u32],
    id: u32,
    adjacent: &mut dyn FnMut(u32) -> bool,
) -> (bool, usize) {
    if words.is_empty() {
        return (true, 0);
    }
    if words[0] > id {
        return (false, 0);
    }
    let mut probes = 0;
    let mut found_neighbour = false;
    for &w in words {
        if !found_neighbour {
            probes += 1;
            if adjacent(w) {
                found_neighbour = true;
            }
        } else if w > id {
            return (false, probes);
        }
    }
    (true, probes)
}

/// The unique canonical visit order of a connected vertex set: greedy
/// smallest-id construction. Errors if the set is not connected.
pub fn canonical_form(g: &InputGraph, ids: &[VertexId]) -> Result<Embedding, DisconnectedError> {
    greedy_order(ids, &mut |visited, candidate| {
        visited.iter().any(|&w| g.are_adjacent(w, candidate))
    })
    .map(|words| Embedding::new(ExplorationMode::VertexInduced, words))
}

/// Edge-based analogue of [`canonical_form`]: greedy smallest-id order under
/// shared-endpoint adjacency.
pub fn canonical_form_edges(
    g: &InputGraph,
    ids: &[EdgeId],
) -> Result<Embedding, DisconnectedError> {
    greedy_order(ids, &mut |visited, candidate| {
        visited.iter().any(|&w| g.edges_share_endpoint(w, candidate))
    })
    .map(|words| Embedding::new(ExplorationMode::EdgeInduced, words))
}

fn greedy_order(
    ids: &[u32],
    touches_visited: &mut dyn FnMut(&[u32], u32) -> bool,
) -> Result<Vec<u32>, DisconnectedError> {
    if ids.is_empty() {
        return Ok(Vec::new());
    }
    let mut remaining: Vec<u32> = ids.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    let mut order = vec![remaining.remove(0)];
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .copied()
            .find(|&c| touches_visited(&order, c))
            .ok_or(DisconnectedError)?;
        remaining.retain(|&c| c != next);
        order.push(next);
    }
    Ok(order)
}
