//! Pattern templates, quick-pattern extraction, and pattern canonization.
//!
//! A pattern is a small labeled template graph over ordered slots `0..k-1`.
//! A *quick* pattern is read off an embedding in visit order in linear time;
//! automorphic embeddings may produce different quick patterns. The
//! *canonical* pattern is the unique representative of an isomorphism class
//! and serves as the aggregation key: two patterns receive byte-identical
//! canonical forms iff they are isomorphic (labels preserved, edge labels
//! included).
//!
//! Canonization works by label/degree partition refinement followed by
//! backtracking over all refinement-respecting slot orderings, keeping the
//! lexicographically smallest serialization. Workload patterns are small
//! (≤ 7 slots in practice), so the residual factorial cost is confined to
//! ties the refinement cannot split; a configurable size cap guards against
//! accidental blowups.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::embedding::{Embedding, ExplorationMode};
use crate::graph::{InputGraph, Label, VertexId};

pub const DEFAULT_MAX_PATTERN_SIZE: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern has {size} slots, exceeding the configured maximum of {max}")]
    TooLarge { size: usize, max: usize },
}

/// A small labeled template graph. Edges are stored as
/// `(min slot, max slot, edge label)`, sorted. The `canonical` flag records
/// whether slot order is embedding visit order (quick pattern) or
/// canonization output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    labels: Vec<Label>,
    edges: Vec<(u32, u32, Label)>,
    canonical: bool,
}

impl Pattern {
    /// Builds a quick-flagged pattern; edges are normalized to
    /// `(min, max, label)` and sorted. Panics on self-loops or duplicate
    /// slot pairs (programming errors in callers).
    pub fn new(labels: Vec<Label>, edges: Vec<(u32, u32, Label)>) -> Self {
        let k = labels.len() as u32;
        let mut norm: Vec<(u32, u32, Label)> = edges
            .into_iter()
            .map(|(a, b, l)| {
                assert!(a < k && b < k, "slot out of range");
                assert_ne!(a, b, "self-loop in pattern");
                (a.min(b), a.max(b), l)
            })
            .collect();
        norm.sort_unstable();
        assert!(
            norm.windows(2).all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1)),
            "duplicate pattern edge"
        );
        Pattern {
            labels,
            edges: norm,
            canonical: false,
        }
    }

    /// Number of slots (the pattern order k).
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn edges(&self) -> &[(u32, u32, Label)] {
        &self.edges
    }

    pub fn is_canonical_form(&self) -> bool {
        self.canonical
    }

    pub fn slot_degree(&self, slot: u32) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b, _)| a == slot || b == slot)
            .count()
    }

    /// Deterministic byte serialization used as aggregation key: k, then
    /// slot labels in slot order, then sorted `(min, max, label)` edge
    /// triples, all little-endian u32.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * (1 + self.labels.len() + 3 * self.edges.len()));
        out.extend_from_slice(&(self.labels.len() as u32).to_le_bytes());
        for &l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for &(a, b, l) in &self.edges {
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&b.to_le_bytes());
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    /// Textual rendering for output files:
    /// `k=<k>; labels=<l0,...>; edges=<(a,b,l)...>`.
    pub fn render(&self) -> String {
        let mut s = format!("k={}; labels=", self.order());
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{l}");
        }
        s.push_str("; edges=");
        for &(a, b, l) in &self.edges {
            let _ = write!(s, "({a},{b},{l})");
        }
        s
    }

    /// Pattern with slots renamed through `perm`, where `perm[new] = old`.
    fn permuted(&self, perm: &[u32]) -> Pattern {
        let mut inv = vec![0u32; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old as usize] = new as u32;
        }
        let labels = perm.iter().map(|&old| self.labels[old as usize]).collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b, l)| {
                let (x, y) = (inv[a as usize], inv[b as usize]);
                (x.min(y), x.max(y), l)
            })
            .collect();
        Pattern::new(labels, edges)
    }

    fn adjacency_matrix(&self) -> Vec<Option<Label>> {
        let k = self.order();
        let mut m = vec![None; k * k];
        for &(a, b, l) in &self.edges {
            m[a as usize * k + b as usize] = Some(l);
            m[b as usize * k + a as usize] = Some(l);
        }
        m
    }
}

/// A bijection from the slots of one pattern onto another (or itself, for
/// automorphisms): `map(i)` is the image slot of slot `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotMapping(Vec<u32>);

impl SlotMapping {
    pub fn identity(k: usize) -> Self {
        SlotMapping((0..k as u32).collect())
    }

    pub fn map(&self, slot: u32) -> u32 {
        self.0[slot as usize]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// Quick pattern of an embedding, plus the slot-to-graph-vertex assignment
/// realized by the visit order. Linear in the embedding size plus its edge
/// count.
///
/// Vertex-induced: slot i carries the label of the i-th visited vertex and
/// there is one pattern edge per induced edge. Edge-induced: slots are the
/// endpoints in first-appearance order ((min,max) within each visited edge)
/// and there is one pattern edge per visited edge.
pub fn quick_pattern(g: &InputGraph, e: &Embedding) -> (Pattern, Vec<VertexId>) {
    let slot_vertices = e.vertices(g);
    let labels = slot_vertices.iter().map(|&v| g.vertex_label(v)).collect();
    let slot_of = |v: VertexId| -> u32 {
        slot_vertices.iter().position(|&x| x == v).unwrap() as u32
    };
    let mut edges = Vec::new();
    match e.mode() {
        ExplorationMode::VertexInduced => {
            for (i, &u) in slot_vertices.iter().enumerate() {
                for (j, &v) in slot_vertices.iter().enumerate().skip(i + 1) {
                    if let Some(eid) = g.edge_between(u, v) {
                        edges.push((i as u32, j as u32, g.edge(eid).label));
                    }
                }
            }
        }
        ExplorationMode::EdgeInduced => {
            for &w in e.words() {
                let edge = g.edge(w);
                edges.push((slot_of(edge.a), slot_of(edge.b), edge.label));
            }
        }
    }
    (Pattern::new(labels, edges), slot_vertices)
}

/// Canonical representative of the pattern's isomorphism class, plus one
/// slot bijection from `p` onto it. A pattern that is already in canonical
/// form comes back unchanged with the identity mapping.
pub fn canonical_pattern(
    p: &Pattern,
    max_size: usize,
) -> Result<(Pattern, SlotMapping), PatternError> {
    let k = p.order();
    if k > max_size {
        return Err(PatternError::TooLarge { size: k, max: max_size });
    }
    if k == 0 {
        let mut out = p.clone();
        out.canonical = true;
        return Ok((out, SlotMapping::identity(0)));
    }

    let cells = refinement_cells(p);

    let mut best_key: Option<Vec<u8>> = None;
    let mut best_perm: Vec<u32> = Vec::new();
    let mut perm: Vec<u32> = Vec::with_capacity(k);
    for_each_cell_ordering(&cells, &mut perm, &mut |perm| {
        let candidate = p.permuted(perm);
        let key = candidate.key();
        let better = match &best_key {
            None => true,
            Some(best) => key < *best || (key == *best && perm < &best_perm[..]),
        };
        if better {
            best_key = Some(key);
            best_perm = perm.to_vec();
        }
    });

    let mut canon = p.permuted(&best_perm);
    canon.canonical = true;
    // best_perm[new] = old; the mapping sends old slots to new positions.
    let mut mapping = vec![0u32; k];
    for (new, &old) in best_perm.iter().enumerate() {
        mapping[old as usize] = new as u32;
    }
    Ok((canon, SlotMapping(mapping)))
}

/// Groups slots into cells of an isomorphism-invariant partition, cells
/// ordered by their invariant key. Iterated refinement: a slot's color is
/// joined with the multiset of (neighbor color, edge label) pairs until the
/// partition stabilizes.
fn refinement_cells(p: &Pattern) -> Vec<Vec<u32>> {
    let k = p.order();
    let matrix = p.adjacency_matrix();
    // Initial colors: rank of the slot label among distinct labels.
    let mut sorted_labels: Vec<Label> = p.labels.to_vec();
    sorted_labels.sort_unstable();
    sorted_labels.dedup();
    let mut colors: Vec<usize> = p
        .labels
        .iter()
        .map(|l| sorted_labels.binary_search(l).unwrap())
        .collect();

    loop {
        let mut signatures: Vec<(usize, Vec<(usize, Label)>)> = Vec::with_capacity(k);
        for i in 0..k {
            let mut nbrs: Vec<(usize, Label)> = (0..k)
                .filter_map(|j| matrix[i * k + j].map(|l| (colors[j], l)))
                .collect();
            nbrs.sort_unstable();
            signatures.push((colors[i], nbrs));
        }
        let mut distinct: Vec<&(usize, Vec<(usize, Label)>)> = signatures.iter().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let next: Vec<usize> = signatures
            .iter()
            .map(|s| distinct.binary_search(&s).unwrap())
            .collect();
        if next == colors {
            break;
        }
        colors = next;
    }

    let num_cells = colors.iter().max().map_or(0, |&c| c + 1);
    let mut cells = vec![Vec::new(); num_cells];
    for (slot, &c) in colors.iter().enumerate() {
        cells[c].push(slot as u32);
    }
    cells
}

/// Enumerates every slot ordering that lists cells in order with arbitrary
/// order inside each cell.
fn for_each_cell_ordering(
    cells: &[Vec<u32>],
    prefix: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    fn cell_perms(
        cells: &[Vec<u32>],
        ci: usize,
        cell: &mut Vec<u32>,
        i: usize,
        prefix: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]),
    ) {
        if i == cell.len() {
            prefix.extend_from_slice(cell);
            rec(cells, ci + 1, prefix, f);
            prefix.truncate(prefix.len() - cell.len());
            return;
        }
        for j in i..cell.len() {
            cell.swap(i, j);
            cell_perms(cells, ci, cell, i + 1, prefix, f);
            cell.swap(i, j);
        }
    }
    fn rec(cells: &[Vec<u32>], ci: usize, prefix: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if ci == cells.len() {
            f(prefix);
            return;
        }
        let mut cell = cells[ci].clone();
        cell_perms(cells, ci, &mut cell, 0, prefix, f);
    }
    rec(cells, 0, prefix, f);
}

/// Label-preserving isomorphism test by brute-force backtracking.
/// Independent of the canonization code path; serves as its oracle.
pub fn patterns_isomorphic(p1: &Pattern, p2: &Pattern) -> bool {
    if p1.order() != p2.order() || p1.edges.len() != p2.edges.len() {
        return false;
    }
    !find_isomorphisms(p1, p2, true).is_empty()
}

/// All label- and edge-preserving slot bijections from `p` onto itself.
pub fn automorphisms(p: &Pattern) -> Vec<SlotMapping> {
    find_isomorphisms(p, p, false)
        .into_iter()
        .map(SlotMapping)
        .collect()
}

fn find_isomorphisms(p1: &Pattern, p2: &Pattern, first_only: bool) -> Vec<Vec<u32>> {
    let k = p1.order();
    let m1 = p1.adjacency_matrix();
    let m2 = p2.adjacency_matrix();
    let mut assignment: Vec<u32> = Vec::with_capacity(k);
    let mut used = vec![false; k];
    let mut out = Vec::new();

    fn rec(
        k: usize,
        p1: &Pattern,
        p2: &Pattern,
        m1: &[Option<Label>],
        m2: &[Option<Label>],
        assignment: &mut Vec<u32>,
        used: &mut [bool],
        out: &mut Vec<Vec<u32>>,
        first_only: bool,
    ) {
        if out.len() == 1 && first_only {
            return;
        }
        let i = assignment.len();
        if i == k {
            out.push(assignment.clone());
            return;
        }
        for cand in 0..k {
            if used[cand]
                || p1.labels[i] != p2.labels[cand]
                || p1.slot_degree(i as u32) != p2.slot_degree(cand as u32)
            {
                continue;
            }
            let consistent = (0..i).all(|j| {
                m1[i * k + j] == m2[cand * k + assignment[j] as usize]
            });
            if !consistent {
                continue;
            }
            used[cand] = true;
            assignment.push(cand as u32);
            rec(k, p1, p2, m1, m2, assignment, used, out, first_only);
            assignment.pop();
            used[cand] = false;
        }
    }
    rec(k, p1, p2, &m1, &m2, &mut assignment, &mut used, &mut out, first_only);
    out
}

/// Per-worker cache of pattern automorphism groups, keyed by pattern bytes.
#[derive(Debug, Default)]
pub struct AutomorphismCache {
    map: HashMap<Vec<u8>, std::sync::Arc<Vec<SlotMapping>>>,
}

impl AutomorphismCache {
    pub fn get(&mut self, p: &Pattern) -> std::sync::Arc<Vec<SlotMapping>> {
        self.map
            .entry(p.key())
            .or_insert_with(|| std::sync::Arc::new(automorphisms(p)))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use crate::graph::InputGraph;

    fn edge_emb(words: &[u32]) -> Embedding {
        Embedding::new(ExplorationMode::EdgeInduced, words.to_vec())
    }

    fn vertex_emb(words: &[u32]) -> Embedding {
        Embedding::new(ExplorationMode::VertexInduced, words.to_vec())
    }

    #[test]
    fn quick_patterns_distinguish_visit_order() {
        let g = example_graph();
        // Edge 0 = (0,1): labels (0,1). Edge 2 = (2,3): labels (0,1).
        // Edge 1 = (1,2): labels (1,0) — a distinct quick pattern.
        let (q0, s0) = quick_pattern(&g, &edge_emb(&[0]));
        let (q2, _) = quick_pattern(&g, &edge_emb(&[2]));
        let (q1, s1) = quick_pattern(&g, &edge_emb(&[1]));
        assert_eq!(q0, q2);
        assert_ne!(q0, q1);
        assert_eq!(q0.labels(), &[0, 1]);
        assert_eq!(q1.labels(), &[1, 0]);
        assert_eq!(s0, vec![0, 1]);
        assert_eq!(s1, vec![1, 2]);
    }

    #[test]
    fn quick_pattern_single_vertex_and_triangle() {
        let g = InputGraph::new(vec![5], &[]);
        let e = vertex_emb(&[0]);
        let (q, _) = quick_pattern(&g, &e);
        assert_eq!(q.order(), 1);
        assert_eq!(q.labels(), &[5]);
        assert!(q.edges().is_empty());

        let tri = InputGraph::unlabeled(3, &[(0, 1), (1, 2), (0, 2)]);
        let (q, _) = quick_pattern(&tri, &vertex_emb(&[0, 1, 2]));
        assert_eq!(q.order(), 3);
        assert_eq!(q.edges().len(), 3);
    }

    #[test]
    fn isomorphic_quick_patterns_share_canonical_form() {
        let by = Pattern::new(vec![0, 1], vec![(0, 1, 0)]);
        let yb = Pattern::new(vec![1, 0], vec![(0, 1, 0)]);
        let (c1, m1) = canonical_pattern(&by, DEFAULT_MAX_PATTERN_SIZE).unwrap();
        let (c2, m2) = canonical_pattern(&yb, DEFAULT_MAX_PATTERN_SIZE).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.key(), c2.key());
        // Each mapping is a genuine isomorphism onto the canonical pattern.
        for (p, m) in [(&by, &m1), (&yb, &m2)] {
            let perm: Vec<u32> = {
                let mut inv = vec![0u32; 2];
                for i in 0..2 {
                    inv[m.map(i) as usize] = i;
                }
                inv
            };
            assert_eq!(&p.permuted(&perm), &Pattern { canonical: false, ..c1.clone() });
        }
    }

    #[test]
    fn canonization_is_idempotent_with_identity_mapping() {
        let p = Pattern::new(vec![1, 0, 1], vec![(0, 1, 2), (1, 2, 0)]);
        let (c, _) = canonical_pattern(&p, DEFAULT_MAX_PATTERN_SIZE).unwrap();
        let (c2, m2) = canonical_pattern(&c, DEFAULT_MAX_PATTERN_SIZE).unwrap();
        assert_eq!(c, c2);
        assert!(m2.is_identity());
    }

    #[test]
    fn size_cap_is_enforced() {
        let p = Pattern::new(vec![0; 11], (0..10).map(|i| (i, i + 1, 0)).collect());
        assert_eq!(
            canonical_pattern(&p, 10),
            Err(PatternError::TooLarge { size: 11, max: 10 })
        );
    }

    /// All quick patterns of unlabeled 4-vertex connected embeddings: slot 1
    /// must attach to slot 0, slot 2 to one of {0,1} (3 ways), slot 3 to a
    /// nonempty subset of {0,1,2} (7 ways) — 21 in total, collapsing to the
    /// 6 connected 4-vertex shapes.
    #[test]
    fn twenty_one_quick_patterns_collapse_to_six() {
        let mut quicks = Vec::new();
        for c2 in 1..4u32 {
            // bitmask over {0,1} for slot 2's back-edges
            for c3 in 1..8u32 {
                let mut edges = vec![(0, 1, 0)];
                for b in 0..2 {
                    if c2 & (1 << b) != 0 {
                        edges.push((b, 2, 0));
                    }
                }
                for b in 0..3 {
                    if c3 & (1 << b) != 0 {
                        edges.push((b, 3, 0));
                    }
                }
                quicks.push(Pattern::new(vec![0; 4], edges));
            }
        }
        assert_eq!(quicks.len(), 21);
        let mut keys: Vec<Vec<u8>> = quicks
            .iter()
            .map(|q| canonical_pattern(q, 10).unwrap().0.key())
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 6);

        // Independent check via the isomorphism oracle.
        let mut reps: Vec<Pattern> = Vec::new();
        for q in &quicks {
            if !reps.iter().any(|r| patterns_isomorphic(r, q)) {
                reps.push(q.clone());
            }
        }
        assert_eq!(reps.len(), 6);
    }

    #[test]
    fn three_quick_patterns_at_size_three() {
        let mut quicks = Vec::new();
        for c2 in 1..4u32 {
            let mut edges = vec![(0, 1, 0)];
            for b in 0..2 {
                if c2 & (1 << b) != 0 {
                    edges.push((b, 2, 0));
                }
            }
            quicks.push(Pattern::new(vec![0; 3], edges));
        }
        assert_eq!(quicks.len(), 3);
        let mut keys: Vec<Vec<u8>> = quicks
            .iter()
            .map(|q| canonical_pattern(q, 10).unwrap().0.key())
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 2);
    }

    #[test]
    fn isomorphism_oracle_cases() {
        let chain = Pattern::new(vec![0, 0, 0], vec![(0, 1, 0), (1, 2, 0)]);
        let triangle = Pattern::new(vec![0, 0, 0], vec![(0, 1, 0), (1, 2, 0), (0, 2, 0)]);
        assert!(!patterns_isomorphic(&chain, &triangle));
        assert!(patterns_isomorphic(&chain, &chain));

        let cycle4 = Pattern::new(vec![0; 4], vec![(0, 1, 0), (1, 2, 0), (2, 3, 0), (0, 3, 0)]);
        let chain4 = Pattern::new(vec![0; 4], vec![(0, 1, 0), (1, 2, 0), (2, 3, 0)]);
        assert!(!patterns_isomorphic(&cycle4, &chain4));
    }

    #[test]
    fn edge_labels_distinguish_patterns() {
        let a = Pattern::new(vec![0, 0], vec![(0, 1, 1)]);
        let b = Pattern::new(vec![0, 0], vec![(0, 1, 2)]);
        assert!(!patterns_isomorphic(&a, &b));
        assert_ne!(
            canonical_pattern(&a, 10).unwrap().0.key(),
            canonical_pattern(&b, 10).unwrap().0.key()
        );
    }

    #[test]
    fn automorphism_groups() {
        let sym = Pattern::new(vec![0, 0], vec![(0, 1, 0)]);
        assert_eq!(automorphisms(&sym).len(), 2);
        let asym = Pattern::new(vec![0, 1], vec![(0, 1, 0)]);
        assert_eq!(automorphisms(&asym).len(), 1);
        let triangle = Pattern::new(vec![0, 0, 0], vec![(0, 1, 0), (1, 2, 0), (0, 2, 0)]);
        assert_eq!(automorphisms(&triangle).len(), 6);
    }

    #[test]
    fn rendering_and_key_are_stable() {
        let p = Pattern::new(vec![0, 1, 0], vec![(1, 2, 0), (0, 1, 3)]);
        assert_eq!(p.render(), "k=3; labels=0,1,0; edges=(0,1,3)(1,2,0)");
        let mut expect = Vec::new();
        for v in [3u32, 0, 1, 0, 0, 1, 3, 1, 2, 0] {
            expect.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(p.key(), expect);
    }
}
