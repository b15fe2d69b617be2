//! Immutable labeled undirected input graph.
//!
//! Vertices carry contiguous ids `0..N-1`, edges contiguous ids `0..M-1`
//! assigned in file order. Labels are non-negative integers; unlabeled graphs
//! simply give every vertex (and edge) label 0. The graph is immutable after
//! load and safe to share read-only across worker threads.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;
pub type Label = u32;

/// An undirected edge. Endpoints are stored normalized with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub label: Label,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn has_endpoint(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

/// Errors produced by the graph file loader. Each names the offending
/// 1-based line.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: vertex id {found} out of order (expected {expected})")]
    NonContiguous { line: usize, found: u64, expected: u64 },
    #[error("line {line}: neighbor {neighbor} does not exist (graph has {num_vertices} vertices)")]
    DanglingNeighbor {
        line: usize,
        neighbor: u64,
        num_vertices: usize,
    },
    #[error("line {line}: duplicate edge ({a},{b})")]
    DuplicateEdge { line: usize, a: VertexId, b: VertexId },
    #[error("line {line}: self-loop on vertex {v}")]
    SelfLoop { line: usize, v: VertexId },
    #[error("line {line}: edge ({a},{b}) listed with label {found} but previously with {expected}")]
    LabelMismatch {
        line: usize,
        a: VertexId,
        b: VertexId,
        found: Label,
        expected: Label,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable labeled undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputGraph {
    vertex_labels: Vec<Label>,
    edges: Vec<Edge>,
    /// Per-vertex list of (neighbor id, edge id), strictly ascending by
    /// neighbor id.
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
}

impl InputGraph {
    /// Builds a graph from explicit parts. Intended for fixtures and tests;
    /// panics on invariant violations (self-loop, duplicate edge, bad id).
    pub fn new(vertex_labels: Vec<Label>, edge_list: &[(VertexId, VertexId, Label)]) -> Self {
        let n = vertex_labels.len();
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen = HashMap::new();
        for &(u, v, label) in edge_list {
            assert!((u as usize) < n && (v as usize) < n, "edge endpoint out of range");
            assert_ne!(u, v, "self-loop");
            let (a, b) = (u.min(v), u.max(v));
            assert!(seen.insert((a, b), ()).is_none(), "duplicate edge ({a},{b})");
            edges.push(Edge { a, b, label });
        }
        Self::assemble(vertex_labels, edges)
    }

    /// Convenience constructor for unlabeled fixtures: all vertex and edge
    /// labels are 0.
    pub fn unlabeled(num_vertices: usize, edge_list: &[(VertexId, VertexId)]) -> Self {
        let edges: Vec<(VertexId, VertexId, Label)> =
            edge_list.iter().map(|&(u, v)| (u, v, 0)).collect();
        Self::new(vec![0; num_vertices], &edges)
    }

    fn assemble(vertex_labels: Vec<Label>, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_labels.len()];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.a as usize].push((e.b, id as EdgeId));
            adjacency[e.b as usize].push((e.a, id as EdgeId));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        InputGraph {
            vertex_labels,
            edges,
            adjacency,
        }
    }

    /// Loads a graph from the text format described in the crate README:
    /// one vertex per line, `<vertex-id> <vertex-label>
    /// [<neighbor-id>[:<edge-label>] ...]`, `#` comments, ids ascending from
    /// 0. Each undirected edge may appear on one or both endpoint lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    /// Parses the graph file format from an in-memory string.
    pub fn from_text(text: &str) -> Result<Self, LoadError> {
        let mut vertex_labels: Vec<Label> = Vec::new();
        let mut edges: Vec<Edge> = Vec::new();
        // (a,b) -> (edge index, first-listing vertex, cross-listed yet)
        let mut edge_index: HashMap<(VertexId, VertexId), (usize, VertexId, bool)> = HashMap::new();
        // Forward references are legal; remember the listing line of every
        // referenced neighbor so dangling ids can be reported precisely.
        let mut references: Vec<(usize, u64)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let id_tok = tokens.next().expect("nonempty line has a token");
            let vid: u64 = id_tok.parse().map_err(|_| LoadError::Malformed {
                line,
                msg: format!("invalid vertex id `{id_tok}`"),
            })?;
            let expected = vertex_labels.len() as u64;
            if vid != expected {
                return Err(LoadError::NonContiguous {
                    line,
                    found: vid,
                    expected,
                });
            }
            let vid = vid as VertexId;
            let label_tok = tokens.next().ok_or_else(|| LoadError::Malformed {
                line,
                msg: "missing vertex label".to_string(),
            })?;
            let label: Label = label_tok.parse().map_err(|_| LoadError::Malformed {
                line,
                msg: format!("invalid vertex label `{label_tok}`"),
            })?;
            vertex_labels.push(label);

            for tok in tokens {
                let (nbr_tok, elabel_tok) = match tok.split_once(':') {
                    Some((n, l)) => (n, Some(l)),
                    None => (tok, None),
                };
                let nbr: u64 = nbr_tok.parse().map_err(|_| LoadError::Malformed {
                    line,
                    msg: format!("invalid neighbor id `{nbr_tok}`"),
                })?;
                let elabel: Label = match elabel_tok {
                    Some(l) => l.parse().map_err(|_| LoadError::Malformed {
                        line,
                        msg: format!("invalid edge label `{l}`"),
                    })?,
                    None => 0,
                };
                if nbr == vid as u64 {
                    return Err(LoadError::SelfLoop { line, v: vid });
                }
                references.push((line, nbr));
                let nbr = nbr as VertexId;
                let key = (vid.min(nbr), vid.max(nbr));
                match edge_index.get_mut(&key) {
                    None => {
                        edge_index.insert(key, (edges.len(), vid, false));
                        edges.push(Edge {
                            a: key.0,
                            b: key.1,
                            label: elabel,
                        });
                    }
                    Some((idx, first_by, cross_listed)) => {
                        if *first_by == vid || *cross_listed {
                            return Err(LoadError::DuplicateEdge {
                                line,
                                a: key.0,
                                b: key.1,
                            });
                        }
                        let expected = edges[*idx].label;
                        if expected != elabel {
                            return Err(LoadError::LabelMismatch {
                                line,
                                a: key.0,
                                b: key.1,
                                found: elabel,
                                expected,
                            });
                        }
                        *cross_listed = true;
                    }
                }
            }
        }

        let n = vertex_labels.len();
        for (line, nbr) in references {
            if nbr >= n as u64 {
                return Err(LoadError::DanglingNeighbor {
                    line,
                    neighbor: nbr,
                    num_vertices: n,
                });
            }
        }
        Ok(Self::assemble(vertex_labels, edges))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_label(&self, v: VertexId) -> Label {
        self.vertex_labels[v as usize]
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e as usize]
    }

    /// Adjacency list of `v`: (neighbor, edge id) pairs, strictly ascending
    /// by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    /// True iff the undirected edge {u,v} exists. Binary search over the
    /// sorted adjacency list of `u`.
    pub fn are_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_between(u, v).is_some()
    }

    /// Edge id of {u,v}, if present.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let list = &self.adjacency[u as usize];
        list.binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|i| list[i].1)
    }

    /// True iff two edges share an endpoint (the edge-granularity adjacency
    /// used by edge-based exploration).
    pub fn edges_share_endpoint(&self, e1: EdgeId, e2: EdgeId) -> bool {
        let x = self.edge(e1);
        let y = self.edge(e2);
        x.a == y.a || x.a == y.b || x.b == y.a || x.b == y.b
    }

    /// Copy of the graph with every vertex and edge label set to 0. Used for
    /// unlabeled exploration (motifs on labeled inputs).
    pub fn strip_labels(&self) -> InputGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                a: e.a,
                b: e.b,
                label: 0,
            })
            .collect();
        InputGraph {
            vertex_labels: vec![0; self.vertex_labels.len()],
            edges,
            adjacency: self.adjacency.clone(),
        }
    }
}

impl fmt::Display for InputGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph(vertices={}, edges={})",
            self.num_vertices(),
            self.num_edges()
        )
    }
}

/// Optional dictionary mapping string label names to the integer labels used
/// in graph files. Format: one `<name> <integer>` pair per line, `#`
/// comments.
#[derive(Debug, Clone, Default)]
pub struct LabelDict {
    by_name: HashMap<String, Label>,
    by_id: HashMap<Label, String>,
}

impl LabelDict {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let text = fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, LoadError> {
        let mut dict = LabelDict::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let name = tokens.next().expect("nonempty line");
            let id_tok = tokens.next().ok_or_else(|| LoadError::Malformed {
                line,
                msg: format!("label `{name}` is missing its integer id"),
            })?;
            let id: Label = id_tok.parse().map_err(|_| LoadError::Malformed {
                line,
                msg: format!("invalid label id `{id_tok}`"),
            })?;
            dict.by_name.insert(name.to_string(), id);
            dict.by_id.insert(id, name.to_string());
        }
        Ok(dict)
    }

    pub fn id(&self, name: &str) -> Option<Label> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: Label) -> Option<&str> {
        self.by_id.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

/// The 4-vertex example graph used across module tests and docs: vertices
/// 0,2 label 0 and 1,3 label 1; edges (0,1),(1,2),(2,3),(0,2) with ids 0..3
/// in that order.
pub fn example_graph() -> InputGraph {
    InputGraph::new(vec![0, 1, 0, 1], &[(0, 1, 0), (1, 2, 0), (2, 3, 0), (0, 2, 0)])
}
