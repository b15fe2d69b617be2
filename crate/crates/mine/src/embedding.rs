//! Embeddings and candidate-extension generation.
//!
//! An embedding is a connected subgraph instance recorded as the ordered
//! sequence of ids in visit order: vertex ids under vertex-induced
//! exploration, edge ids under edge-induced exploration. Embeddings are
//! immutable values; equality is sequence equality, so automorphic
//! embeddings with different visit orders compare unequal — duplicate
//! elimination is the job of the canonicality check, not of `Eq`.
//!
//! Under edge-induced exploration two edges count as connected when they
//! share an endpoint. An extension edge whose endpoints both already belong
//! to the embedding (closing a cycle) is still incident and is generated as
//! a candidate.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::graph::{EdgeId, InputGraph, VertexId};

/// Exploration mode, fixed for the lifetime of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExplorationMode {
    VertexInduced,
    EdgeInduced,
}

/// An ordered sequence of vertex ids (vertex-induced) or edge ids
/// (edge-induced), in visit order. Every consecutive prefix denotes a
/// connected subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    mode: ExplorationMode,
    words: Vec<u32>,
}

impl Embedding {
    pub fn new(mode: ExplorationMode, words: Vec<u32>) -> Self {
        Embedding { mode, words }
    }

    pub fn single(mode: ExplorationMode, id: u32) -> Self {
        Embedding { mode, words: vec![id] }
    }

    pub fn empty(mode: ExplorationMode) -> Self {
        Embedding { mode, words: Vec::new() }
    }

    pub fn mode(&self) -> ExplorationMode {
        self.mode
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// New embedding with `id` appended.
    pub fn extended(&self, id: u32) -> Embedding {
        let mut words = Vec::with_capacity(self.words.len() + 1);
        words.extend_from_slice(&self.words);
        words.push(id);
        Embedding { mode: self.mode, words }
    }

    pub(crate) fn push_word(&mut self, id: u32) {
        self.words.push(id);
    }

    pub(crate) fn pop_word(&mut self) {
        self.words.pop();
    }

    /// Vertices of the embedding in first-appearance order. For
    /// vertex-induced embeddings this is the visit order itself; for
    /// edge-induced embeddings it is the endpoint closure, endpoints of each
    /// edge taken in (min, max) order. This ordering doubles as the
    /// slot-to-vertex assignment of the embedding's quick pattern.
    pub fn vertices(&self, g: &InputGraph) -> Vec<VertexId> {
        match self.mode {
            ExplorationMode::VertexInduced => self.words.clone(),
            ExplorationMode::EdgeInduced => {
                let mut seen = Vec::new();
                for &w in &self.words {
                    let e = g.edge(w);
                    if !seen.contains(&e.a) {
                        seen.push(e.a);
                    }
                    if !seen.contains(&e.b) {
                        seen.push(e.b);
                    }
                }
                seen
            }
        }
    }

    pub fn num_vertices(&self, g: &InputGraph) -> usize {
        match self.mode {
            ExplorationMode::VertexInduced => self.words.len(),
            ExplorationMode::EdgeInduced => self.vertices(g).len(),
        }
    }

    /// Edge ids of the denoted subgraph. Vertex-induced: every graph edge
    /// with both endpoints in the vertex set, ascending by edge id.
    /// Edge-induced: exactly the visited edges, in visit order.
    pub fn edge_ids(&self, g: &InputGraph) -> Vec<EdgeId> {
        match self.mode {
            ExplorationMode::VertexInduced => {
                let mut out = Vec::new();
                for (i, &u) in self.words.iter().enumerate() {
                    for &v in &self.words[i + 1..] {
                        if let Some(e) = g.edge_between(u, v) {
                            out.push(e);
                        }
                    }
                }
                out.sort_unstable();
                out
            }
            ExplorationMode::EdgeInduced => self.words.clone(),
        }
    }

    /// Textual rendering used in output files. Vertex-induced:
    /// `v0 v1 ... vk` in visit order. Edge-induced: `(a,b) (c,d) ...` via
    /// endpoints, visit order.
    pub fn render(&self, g: &InputGraph) -> String {
        let mut s = String::new();
        match self.mode {
            ExplorationMode::VertexInduced => {
                for (i, w) in self.words.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{w}");
                }
            }
            ExplorationMode::EdgeInduced => {
                for (i, &w) in self.words.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    let e = g.edge(w);
                    let _ = write!(s, "({},{})", e.a, e.b);
                }
            }
        }
        s
    }
}

/// All size-1 embeddings of the graph in ascending id order: one per vertex
/// (vertex-induced) or one per edge (edge-induced). The expansion of the
/// initial "undefined" embedding.
pub fn initial_candidates(g: &InputGraph, mode: ExplorationMode) -> Vec<Embedding> {
    let count = match mode {
        ExplorationMode::VertexInduced => g.num_vertices(),
        ExplorationMode::EdgeInduced => g.num_edges(),
    };
    (0..count as u32).map(|id| Embedding::single(mode, id)).collect()
}

/// Extension candidates of a nonempty embedding, strictly ascending, each
/// exactly once, never an id already in the embedding.
///
/// Vertex-induced: every vertex adjacent to some embedding vertex.
/// Edge-induced: every edge incident to some embedding vertex, including
/// edges that close a cycle among existing vertices.
pub fn extend_candidates(g: &InputGraph, e: &Embedding) -> Vec<u32> {
    debug_assert!(!e.is_empty());
    match e.mode() {
        ExplorationMode::VertexInduced => {
            let mut out = BTreeSet::new();
            for &v in e.words() {
                for &(n, _) in g.neighbors(v) {
                    out.insert(n);
                }
            }
            for &v in e.words() {
                out.remove(&v);
            }
            out.into_iter().collect()
        }
        ExplorationMode::EdgeInduced => {
            let mut out = BTreeSet::new();
            for v in e.vertices(g) {
                for &(_, eid) in g.neighbors(v) {
                    out.insert(eid);
                }
            }
            for &w in e.words() {
                out.remove(&w);
            }
            out.into_iter().collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use crate::graph::InputGraph;

    #[test]
    fn initial_candidates_both_modes() {
        let g = example_graph();
        let vs = initial_candidates(&g, ExplorationMode::VertexInduced);
        assert_eq!(vs.len(), 4);
        assert_eq!(vs[0].words(), &[0]);
        assert_eq!(vs[3].words(), &[3]);
        let es = initial_candidates(&g, ExplorationMode::EdgeInduced);
        assert_eq!(es.len(), 4);
        assert_eq!(es[2].words(), &[2]);

        let empty = InputGraph::unlabeled(0, &[]);
        assert!(initial_candidates(&empty, ExplorationMode::VertexInduced).is_empty());
    }

    #[test]
    fn extend_from_single_vertex() {
        let g = example_graph();
        let e = Embedding::single(ExplorationMode::VertexInduced, 0);
        assert_eq!(extend_candidates(&g, &e), vec![1, 2]);
    }

    #[test]
    fn extend_k4_three_vertices() {
        let g = InputGraph::unlabeled(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let e = Embedding::new(ExplorationMode::VertexInduced, vec![0, 1, 2]);
        assert_eq!(extend_candidates(&g, &e), vec![3]);
    }

    #[test]
    fn extend_full_embedding_is_empty() {
        let g = example_graph();
        let e = Embedding::new(ExplorationMode::VertexInduced, vec![0, 1, 2, 3]);
        assert!(extend_candidates(&g, &e).is_empty());
    }

    #[test]
    fn edge_mode_includes_cycle_closing_edges() {
        let g = InputGraph::unlabeled(3, &[(0, 1), (1, 2), (0, 2)]);
        // Edges 0=(0,1), 1=(1,2): the third edge (0,2) closes the triangle.
        let e = Embedding::new(ExplorationMode::EdgeInduced, vec![0, 1]);
        assert_eq!(extend_candidates(&g, &e), vec![2]);
    }

    #[test]
    fn vertex_induced_view_includes_internal_edges() {
        let g = example_graph();
        let e = Embedding::new(ExplorationMode::VertexInduced, vec![0, 1, 2]);
        // All edges among {0,1,2}: (0,1)=0, (1,2)=1, (0,2)=3.
        assert_eq!(e.edge_ids(&g), vec![0, 1, 3]);
    }

    #[test]
    fn edge_induced_view_is_exactly_the_visited_edges() {
        let g = example_graph();
        // Edges (0,1) and (1,2): vertex closure {0,1,2}, edge (0,2) NOT
        // included.
        let e = Embedding::new(ExplorationMode::EdgeInduced, vec![0, 1]);
        assert_eq!(e.vertices(&g), vec![0, 1, 2]);
        assert_eq!(e.edge_ids(&g), vec![0, 1]);
    }

    #[test]
    fn single_vertex_has_no_edges() {
        let g = example_graph();
        let e = Embedding::single(ExplorationMode::VertexInduced, 3);
        assert!(e.edge_ids(&g).is_empty());
    }

    #[test]
    fn rendering() {
        let g = example_graph();
        let v = Embedding::new(ExplorationMode::VertexInduced, vec![0, 2, 1]);
        assert_eq!(v.render(&g), "0 2 1");
        let e = Embedding::new(ExplorationMode::EdgeInduced, vec![1, 2]);
        assert_eq!(e.render(&g), "(1,2) (2,3)");
    }
}
