//! Shared test oracles: independent subgraph enumeration, isomorphism
//! grouping, minimum image-based support, and random graph generation.
//!
//! Everything here deliberately avoids the engine's own enumeration and
//! canonization paths (growth-set / ESU enumeration, test-local isomorphism
//! backtracking) so that oracle comparisons are meaningful.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mine::embedding::Embedding;
use mine::graph::{EdgeId, InputGraph, VertexId};
use mine::pattern::Pattern;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos–Renyi-style labeled random graph.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, edge_prob: f64, labels: u32) -> InputGraph {
    let vertex_labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..labels)).collect();
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v, 0));
            }
        }
    }
    InputGraph::new(vertex_labels, &edges)
}

/// All connected vertex subsets of size 1..=max_k, by breadth-first set
/// growth with explicit deduplication. Simple and obviously correct; the
/// reference for everything else.
pub fn connected_vertex_subsets(g: &InputGraph, max_k: usize) -> Vec<BTreeSet<VertexId>> {
    let mut all: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut frontier: HashSet<BTreeSet<VertexId>> = (0..g.num_vertices() as u32)
        .map(|v| BTreeSet::from([v]))
        .collect();
    for _ in 0..max_k {
        if frontier.is_empty() {
            break;
        }
        all.extend(frontier.iter().cloned());
        let mut next = HashSet::new();
        for set in &frontier {
            for &v in set {
                for &(u, _) in g.neighbors(v) {
                    if !set.contains(&u) {
                        let mut grown = set.clone();
                        grown.insert(u);
                        next.insert(grown);
                    }
                }
            }
        }
        frontier = next;
    }
    all
}

/// All connected edge subsets of size 1..=max_k (edges connected via shared
/// endpoints), by set growth.
pub fn connected_edge_subsets(g: &InputGraph, max_k: usize) -> Vec<BTreeSet<EdgeId>> {
    let mut all: Vec<BTreeSet<EdgeId>> = Vec::new();
    let mut frontier: HashSet<BTreeSet<EdgeId>> = (0..g.num_edges() as u32)
        .map(|e| BTreeSet::from([e]))
        .collect();
    for _ in 0..max_k {
        if frontier.is_empty() {
            break;
        }
        all.extend(frontier.iter().cloned());
        let mut next = HashSet::new();
        for set in &frontier {
            for &e in set {
                let edge = g.edge(e);
                for v in [edge.a, edge.b] {
                    for &(_, candidate) in g.neighbors(v) {
                        if !set.contains(&candidate) {
                            let mut grown = set.clone();
                            grown.insert(candidate);
                            next.insert(grown);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    all
}

/// ESU-style enumeration of connected vertex subsets of exactly size `k`,
/// each visited once, without materializing the subset space. Memory-lean
/// alternative to [`connected_vertex_subsets`] for large graphs.
pub fn for_each_connected_subset(g: &InputGraph, k: usize, visit: &mut impl FnMut(&[u32])) {
    if k == 0 {
        return;
    }
    let n = g.num_vertices();
    let mut in_closure = vec![false; n];
    for v in 0..n as u32 {
        let mut sub = vec![v];
        in_closure[v as usize] = true;
        let ext_init: Vec<u32> = g
            .neighbors(v)
            .iter()
            .map(|&(u, _)| u)
            .filter(|&u| u > v)
            .collect();
        for &u in &ext_init {
            in_closure[u as usize] = true;
        }
        let mut ext = ext_init.clone();
        esu_extend(g, k, v, &mut sub, &mut ext, &mut in_closure, visit);
        in_closure[v as usize] = false;
        for &u in &ext_init {
            in_closure[u as usize] = false;
        }
    }
}

fn esu_extend(
    g: &InputGraph,
    k: usize,
    start: u32,
    sub: &mut Vec<u32>,
    ext: &mut Vec<u32>,
    in_closure: &mut [bool],
    visit: &mut impl FnMut(&[u32]),
) {
    if sub.len() == k {
        visit(sub);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut added: Vec<u32> = Vec::new();
        for &(u, _) in g.neighbors(w) {
            if u > start && !in_closure[u as usize] {
                in_closure[u as usize] = true;
                added.push(u);
            }
        }
        let mut next_ext: Vec<u32> = ext.iter().copied().chain(added.iter().copied()).collect();
        sub.push(w);
        esu_extend(g, k, start, sub, &mut next_ext, in_closure, visit);
        sub.pop();
        for &u in &added {
            in_closure[u as usize] = false;
        }
    }
}

/// Pattern of a vertex subset, slots in ascending vertex order; returns the
/// slot-to-vertex assignment alongside.
pub fn pattern_of_vertex_subset(g: &InputGraph, set: &BTreeSet<VertexId>) -> (Pattern, Vec<VertexId>) {
    let vertices: Vec<VertexId> = set.iter().copied().collect();
    let labels = vertices.iter().map(|&v| g.vertex_label(v)).collect();
    let mut edges = Vec::new();
    for (i, &u) in vertices.iter().enumerate() {
        for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
            if let Some(e) = g.edge_between(u, v) {
                edges.push((i as u32, j as u32, g.edge(e).label));
            }
        }
    }
    (Pattern::new(labels, edges), vertices)
}

/// Pattern of an edge subset: slots are the endpoint closure in ascending
/// vertex order, one pattern edge per subset edge.
pub fn pattern_of_edge_subset(g: &InputGraph, set: &BTreeSet<EdgeId>) -> (Pattern, Vec<VertexId>) {
    let mut vertex_set: BTreeSet<VertexId> = BTreeSet::new();
    for &e in set {
        let edge = g.edge(e);
        vertex_set.insert(edge.a);
        vertex_set.insert(edge.b);
    }
    let vertices: Vec<VertexId> = vertex_set.iter().copied().collect();
    let labels = vertices.iter().map(|&v| g.vertex_label(v)).collect();
    let slot_of = |v: VertexId| vertices.iter().position(|&x| x == v).unwrap() as u32;
    let edges = set
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            (slot_of(edge.a), slot_of(edge.b), edge.label)
        })
        .collect();
    (Pattern::new(labels, edges), vertices)
}

/// All label- and edge-preserving slot bijections from `a` onto `b`,
/// independent test-local backtracking (not the library's matcher).
pub fn all_isomorphisms(a: &Pattern, b: &Pattern) -> Vec<Vec<u32>> {
    let k = a.order();
    if k != b.order() || a.edges().len() != b.edges().len() {
        return Vec::new();
    }
    let adj = |p: &Pattern| {
        let mut m = vec![None; p.order() * p.order()];
        for &(x, y, l) in p.edges() {
            m[x as usize * p.order() + y as usize] = Some(l);
            m[y as usize * p.order() + x as usize] = Some(l);
        }
        m
    };
    let ma = adj(a);
    let mb = adj(b);
    let mut out = Vec::new();
    let mut used = vec![false; k];
    let mut map = Vec::with_capacity(k);
    fn rec(
        k: usize,
        a: &Pattern,
        b: &Pattern,
        ma: &[Option<u32>],
        mb: &[Option<u32>],
        used: &mut [bool],
        map: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let i = map.len();
        if i == k {
            out.push(map.clone());
            return;
        }
        for c in 0..k {
            if used[c] || a.labels()[i] != b.labels()[c] {
                continue;
            }
            if (0..i).any(|j| ma[i * k + j] != mb[c * k + map[j] as usize]) {
                continue;
            }
            used[c] = true;
            map.push(c as u32);
            rec(k, a, b, ma, mb, used, map, out);
            map.pop();
            used[c] = false;
        }
    }
    rec(k, a, b, &ma, &mb, &mut used, &mut map, &mut out);
    out
}

pub fn oracle_isomorphic(a: &Pattern, b: &Pattern) -> bool {
    !all_isomorphisms(a, b).is_empty()
}

fn bucket_key(p: &Pattern) -> (usize, Vec<u32>, Vec<usize>, usize) {
    let mut labels = p.labels().to_vec();
    labels.sort_unstable();
    let mut degrees: Vec<usize> = (0..p.order() as u32).map(|s| p.slot_degree(s)).collect();
    degrees.sort_unstable();
    (p.order(), labels, degrees, p.edges().len())
}

/// Groups patterns into isomorphism classes; `items` pairs each subset with
/// its pattern. Returns (class representative, member indices).
pub fn group_by_isomorphism(patterns: &[Pattern]) -> Vec<(Pattern, Vec<usize>)> {
    let mut buckets: BTreeMap<(usize, Vec<u32>, Vec<usize>, usize), Vec<usize>> = BTreeMap::new();
    let mut classes: Vec<(Pattern, Vec<usize>)> = Vec::new();
    for (idx, p) in patterns.iter().enumerate() {
        let key = bucket_key(p);
        let bucket = buckets.entry(key).or_default();
        let mut found = None;
        for &class_idx in bucket.iter() {
            if oracle_isomorphic(&classes[class_idx].0, p) {
                found = Some(class_idx);
                break;
            }
        }
        match found {
            Some(class_idx) => classes[class_idx].1.push(idx),
            None => {
                bucket.push(classes.len());
                classes.push((p.clone(), vec![idx]));
            }
        }
    }
    classes
}

/// Motif census: per isomorphism class of connected vertex-induced subsets
/// of size 1..=max_k, the number of subsets.
pub fn motif_census(g: &InputGraph, max_k: usize) -> Vec<(Pattern, u64)> {
    let subsets = connected_vertex_subsets(g, max_k);
    let patterns: Vec<Pattern> = subsets
        .iter()
        .map(|s| pattern_of_vertex_subset(g, s).0)
        .collect();
    group_by_isomorphism(&patterns)
        .into_iter()
        .map(|(rep, members)| (rep, members.len() as u64))
        .collect()
}

/// All cliques of size 1..=max_k as vertex sets.
pub fn clique_subsets(g: &InputGraph, max_k: usize) -> Vec<BTreeSet<VertexId>> {
    connected_vertex_subsets(g, max_k)
        .into_iter()
        .filter(|set| {
            let vs: Vec<u32> = set.iter().copied().collect();
            vs.iter()
                .enumerate()
                .all(|(i, &u)| vs[i + 1..].iter().all(|&v| g.are_adjacent(u, v)))
        })
        .collect()
}

pub struct FsmOracle {
    /// Frequent pattern representatives with true minimum image-based
    /// support, per size.
    pub frequent: Vec<(Pattern, usize)>,
    /// Edge-id sets of every embedding whose pattern is frequent, keyed by
    /// embedding size.
    pub frequent_embeddings: BTreeMap<usize, BTreeSet<BTreeSet<EdgeId>>>,
}

/// Level-wise frequent-subgraph oracle with minimum image-based support.
/// Mirrors the exploration semantics: level s+1 grows only from embeddings
/// of frequent level-s patterns (anti-monotonicity makes this complete),
/// and `cap` bounds the embedding size.
pub fn fsm_oracle(g: &InputGraph, theta: usize, cap: Option<usize>) -> FsmOracle {
    let mut oracle = FsmOracle {
        frequent: Vec::new(),
        frequent_embeddings: BTreeMap::new(),
    };
    let mut current: Vec<BTreeSet<EdgeId>> = (0..g.num_edges() as u32)
        .map(|e| BTreeSet::from([e]))
        .collect();
    let mut size = 1usize;
    while !current.is_empty() {
        let patterns: Vec<Pattern> = current
            .iter()
            .map(|s| pattern_of_edge_subset(g, s).0)
            .collect();
        let classes = group_by_isomorphism(&patterns);
        let mut survivors: Vec<BTreeSet<EdgeId>> = Vec::new();
        for (rep, members) in classes {
            let support = min_image_support(g, &rep, &members, &current);
            if support >= theta {
                for &m in &members {
                    oracle
                        .frequent_embeddings
                        .entry(size)
                        .or_default()
                        .insert(current[m].clone());
                    survivors.push(current[m].clone());
                }
                oracle.frequent.push((rep, support));
            }
        }
        if cap == Some(size) {
            break;
        }
        let mut next: HashSet<BTreeSet<EdgeId>> = HashSet::new();
        for set in &survivors {
            for &e in set {
                let edge = g.edge(e);
                for v in [edge.a, edge.b] {
                    for &(_, candidate) in g.neighbors(v) {
                        if !set.contains(&candidate) {
                            let mut grown = set.clone();
                            grown.insert(candidate);
                            next.insert(grown);
                        }
                    }
                }
            }
        }
        current = next.into_iter().collect();
        size += 1;
    }
    oracle
}

/// True minimum image-based support of a pattern class: per rep slot, the
/// set of distinct graph vertices mapped there by any isomorphism of any
/// member embedding.
fn min_image_support(
    g: &InputGraph,
    rep: &Pattern,
    members: &[usize],
    subsets: &[BTreeSet<EdgeId>],
) -> usize {
    let mut slots: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); rep.order()];
    for &m in members {
        let (member_pattern, vertices) = pattern_of_edge_subset(g, &subsets[m]);
        for iso in all_isomorphisms(&member_pattern, rep) {
            for (i, &v) in vertices.iter().enumerate() {
                slots[iso[i] as usize].insert(v);
            }
        }
    }
    slots.iter().map(BTreeSet::len).min().unwrap_or(0)
}

/// Sorted id-set views of embeddings, for duplicate checks and oracle
/// comparisons.
pub fn id_sets(embeddings: &[Embedding]) -> Vec<BTreeSet<u32>> {
    embeddings
        .iter()
        .map(|e| e.words().iter().copied().collect())
        .collect()
}

/// All visit orders of `set` that are valid vertex-induced embeddings
/// (connected prefixes) and pass the chained incremental canonicality
/// check.
pub fn accepted_orderings(g: &InputGraph, set: &BTreeSet<u32>) -> Vec<Vec<u32>> {
    use mine::canonical::is_canonical_extension;
    use mine::embedding::ExplorationMode;

    fn rec(g: &InputGraph, set: &BTreeSet<u32>, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == set.len() {
            out.push(current.clone());
            return;
        }
        let candidates: Vec<u32> = set
            .iter()
            .copied()
            .filter(|c| !current.contains(c))
            .filter(|&c| current.iter().any(|&w| g.are_adjacent(w, c)))
            .collect();
        for c in candidates {
            let parent = Embedding::new(ExplorationMode::VertexInduced, current.clone());
            if is_canonical_extension(g, &parent, c) {
                current.push(c);
                rec(g, set, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    for &start in set {
        let mut current = vec![start];
        if set.len() == 1 {
            out.push(current.clone());
            continue;
        }
        rec(g, set, &mut current, &mut out);
    }
    out
}

/// The 10-vertex motif fixture: a K4 with two tails and a 4-cycle bridged
/// in, containing every connected shape on 3 and on 4 vertices as an
/// induced subgraph.
pub fn motif_shapes_fixture() -> InputGraph {
    InputGraph::unlabeled(
        10,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (1, 3),
            (2, 3), // K4
            (0, 4), // pendant
            (0, 5),
            (1, 5), // diamond maker
            (6, 7),
            (7, 8),
            (8, 9),
            (6, 9), // 4-cycle
            (4, 9), // bridge creating an induced path of length 3
        ],
    )
}

#[cfg(test)]
mod self_tests {
    use super::*;

    #[test]
    fn esu_agrees_with_growth_enumeration() {
        let mut rng = seeded_rng(7);
        for _ in 0..10 {
            let g = random_graph(&mut rng, 12, 0.3, 1);
            for k in 1..=4 {
                let mut esu: Vec<BTreeSet<u32>> = Vec::new();
                for_each_connected_subset(&g, k, &mut |s| {
                    esu.push(s.iter().copied().collect());
                });
                let mut growth: Vec<BTreeSet<u32>> = connected_vertex_subsets(&g, k)
                    .into_iter()
                    .filter(|s| s.len() == k)
                    .collect();
                esu.sort();
                growth.sort();
                assert_eq!(esu.len(), growth.len(), "k={k}");
                assert_eq!(esu, growth, "k={k}");
            }
        }
    }

    #[test]
    fn fixture_contains_all_six_shapes() {
        let g = motif_shapes_fixture();
        let census = motif_census(&g, 4);
        let size4: Vec<&(Pattern, u64)> = census.iter().filter(|(p, _)| p.order() == 4).collect();
        assert_eq!(size4.len(), 6, "expected all 6 connected 4-vertex shapes");
        let size3: Vec<&(Pattern, u64)> = census.iter().filter(|(p, _)| p.order() == 3).collect();
        assert_eq!(size3.len(), 2);
    }
}
