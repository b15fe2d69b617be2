//! Compressed inter-step embedding storage.
//!
//! An ODAG for a set of same-pattern, same-size canonical embeddings keeps
//! one sorted array per position: the i-th array holds every id occurring at
//! position i of any stored embedding, and an element of array i links to an
//! element of array i+1 iff some stored embedding has the two ids in
//! consecutive positions. The root-to-leaf path language is a superset of
//! the stored set; decoding re-applies the same pruning predicates the
//! engine used at insertion time (canonicality, filters, pattern identity)
//! to discard the spurious paths, and abandons whole subtrees as soon as a
//! prefix fails. Total link storage is bounded by k·N².
//!
//! Cost annotations (#paths below each element) drive balanced work
//! partitioning: the decoded path space is split into blocks of `b` paths
//! handed round-robin to workers, and extraction skips any subtree whose
//! path-index interval misses the worker's blocks.

use std::fmt;

use thiserror::Error;

use crate::embedding::{Embedding, ExplorationMode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OdagError {
    #[error("embedding size {found} does not match ODAG depth {expected}")]
    DepthMismatch { expected: usize, found: usize },
    #[error("exploration mode mismatch")]
    ModeMismatch,
    #[error("pattern key mismatch")]
    KeyMismatch,
    #[error("malformed ODAG bytes: {0}")]
    Corrupt(String),
}

/// Accumulating form of an ODAG: per-position sorted id maps with successor
/// id sets. Insertion and merging never invalidate anything, so workers
/// build these incrementally and merge them at the step barrier before
/// freezing into an [`Odag`] for decoding.
#[derive(Debug, Clone)]
pub struct OdagBuilder {
    mode: ExplorationMode,
    depth: usize,
    levels: Vec<std::collections::BTreeMap<u32, std::collections::BTreeSet<u32>>>,
    inserted: u64,
}

impl OdagBuilder {
    pub fn new(mode: ExplorationMode, depth: usize) -> Self {
        assert!(depth >= 1);
        OdagBuilder {
            mode,
            depth,
            levels: vec![Default::default(); depth],
            inserted: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Count of insert calls. Under engine usage every inserted embedding is
    /// globally distinct, so sums of these counts across merged builders are
    /// exact set sizes.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Records every consecutive pair of the embedding. Idempotent.
    pub fn insert(&mut self, e: &Embedding) -> Result<(), OdagError> {
        if e.len() != self.depth {
            return Err(OdagError::DepthMismatch {
                expected: self.depth,
                found: e.len(),
            });
        }
        if e.mode() != self.mode {
            return Err(OdagError::ModeMismatch);
        }
        let words = e.words();
        for i in 0..self.depth {
            let entry = self.levels[i].entry(words[i]).or_default();
            if i + 1 < self.depth {
                entry.insert(words[i + 1]);
            }
        }
        self.inserted += 1;
        Ok(())
    }

    /// Positionwise union. Commutative, associative, idempotent on the
    /// decoded language.
    pub fn merge(&mut self, other: OdagBuilder) -> Result<(), OdagError> {
        if other.depth != self.depth {
            return Err(OdagError::DepthMismatch {
                expected: self.depth,
                found: other.depth,
            });
        }
        if other.mode != self.mode {
            return Err(OdagError::ModeMismatch);
        }
        for (mine, theirs) in self.levels.iter_mut().zip(other.levels) {
            for (id, succ) in theirs {
                mine.entry(id).or_default().extend(succ);
            }
        }
        self.inserted += other.inserted;
        Ok(())
    }

    /// Converts to the frozen array form under the given pattern key.
    pub fn freeze(self, key: Vec<u8>) -> Odag {
        let mut arrays: Vec<Vec<u32>> = Vec::with_capacity(self.depth);
        for level in &self.levels {
            arrays.push(level.keys().copied().collect());
        }
        let mut successors: Vec<Vec<Vec<u32>>> = Vec::with_capacity(self.depth);
        for (i, level) in self.levels.iter().enumerate() {
            let mut per_elem = Vec::with_capacity(level.len());
            for succ in level.values() {
                if i + 1 < self.depth {
                    let next = &arrays[i + 1];
                    per_elem.push(
                        succ.iter()
                            .map(|id| next.binary_search(id).expect("successor id present") as u32)
                            .collect(),
                    );
                } else {
                    per_elem.push(Vec::new());
                }
            }
            successors.push(per_elem);
        }
        Odag {
            key,
            mode: self.mode,
            depth: self.depth,
            arrays,
            successors,
            stored: self.inserted,
        }
    }
}

/// Frozen ODAG: sorted id arrays plus successor links stored as indices
/// into the next array. Immutable; decoding and partitioning are
/// concurrent-safe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Odag {
    key: Vec<u8>,
    mode: ExplorationMode,
    depth: usize,
    arrays: Vec<Vec<u32>>,
    successors: Vec<Vec<Vec<u32>>>,
    stored: u64,
}

const ODAG_MAGIC: &[u8; 4] = b"ODAG";
const ODAG_VERSION: u8 = 1;

impl Odag {
    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn mode(&self) -> ExplorationMode {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn arrays(&self) -> &[Vec<u32>] {
        &self.arrays
    }

    pub fn successors(&self) -> &[Vec<Vec<u32>>] {
        &self.successors
    }

    /// Number of embeddings inserted while building (exact under engine
    /// usage, where every inserted embedding is distinct).
    pub fn stored(&self) -> u64 {
        self.stored
    }

    /// Total successor links, bounded by depth · N².
    pub fn link_count(&self) -> usize {
        self.successors
            .iter()
            .flat_map(|level| level.iter())
            .map(Vec::len)
            .sum()
    }

    /// Per-element descendant-path counts: 1 for last-array elements, and
    /// the sum over linked next-array elements otherwise.
    pub fn costs(&self) -> Vec<Vec<u64>> {
        let mut costs: Vec<Vec<u64>> = self
            .arrays
            .iter()
            .map(|a| vec![0u64; a.len()])
            .collect();
        for v in &mut costs[self.depth - 1] {
            *v = 1;
        }
        for i in (0..self.depth - 1).rev() {
            for (j, succ) in self.successors[i].iter().enumerate() {
                costs[i][j] = succ.iter().map(|&s| costs[i + 1][s as usize]).sum();
            }
        }
        costs
    }

    /// Size of the decoded path language, spurious paths included.
    pub fn total_paths(&self) -> u64 {
        let costs = self.costs();
        costs[0].iter().sum()
    }

    /// Disjoint, jointly exhaustive work partitions over the decoded path
    /// space: blocks of `block` consecutive path indices assigned
    /// round-robin to the `workers` workers.
    pub fn partitions(&self, workers: usize, block: u64) -> Vec<WorkPartition> {
        assert!(workers >= 1 && block >= 1);
        (0..workers)
            .map(|worker| WorkPartition {
                worker,
                workers,
                block,
            })
            .collect()
    }

    /// Depth-first decode of the paths owned by `part`.
    ///
    /// The visitor is called with each extended prefix (`is_full` false) and
    /// must say whether to descend; at full depth (`is_full` true) its
    /// return value is the accept verdict. The walk performs no checks of
    /// its own — duplicate-id paths and disconnected paths are the
    /// visitor's to reject — but it skips every subtree whose path-index
    /// interval does not intersect the partition.
    pub fn extract(
        &self,
        part: &WorkPartition,
        visitor: &mut dyn FnMut(&Embedding, bool) -> bool,
    ) {
        if self.arrays[0].is_empty() {
            return;
        }
        let costs = self.costs();
        let mut scratch = Embedding::empty(self.mode);
        let mut offset = 0u64;
        for (j, &cost) in costs[0].iter().enumerate() {
            if part.intersects(offset, cost) {
                self.descend(0, j, offset, &costs, part, &mut scratch, visitor);
            }
            offset += cost;
        }
    }

    fn descend(
        &self,
        level: usize,
        elem: usize,
        base: u64,
        costs: &[Vec<u64>],
        part: &WorkPartition,
        scratch: &mut Embedding,
        visitor: &mut dyn FnMut(&Embedding, bool) -> bool,
    ) {
        scratch.push_word(self.arrays[level][elem]);
        let full = level + 1 == self.depth;
        // For a leaf, intersects(base, 1) above already implies ownership.
        if visitor(scratch, full) && !full {
            let mut offset = base;
            for &s in &self.successors[level][elem] {
                let child_cost = costs[level + 1][s as usize];
                if part.intersects(offset, child_cost) {
                    self.descend(level + 1, s as usize, offset, costs, part, scratch, visitor);
                }
                offset += child_cost;
            }
        }
        scratch.pop_word();
    }

    /// Every root-to-leaf path, unchecked (including paths with repeated
    /// ids). Test and debugging helper; size equals [`Odag::total_paths`].
    pub fn decode_all_raw(&self) -> Vec<Vec<u32>> {
        fn rec(o: &Odag, level: usize, elem: usize, scratch: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            scratch.push(o.arrays[level][elem]);
            if level + 1 == o.depth {
                out.push(scratch.clone());
            } else {
                for &s in &o.successors[level][elem] {
                    rec(o, level + 1, s as usize, scratch, out);
                }
            }
            scratch.pop();
        }
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        for elem in 0..self.arrays[0].len() {
            rec(self, 0, elem, &mut scratch, &mut out);
        }
        out
    }

    /// Binary serialization: magic `ODAG`, version u8, depth u16 LE,
    /// pattern-key length u32 LE + bytes, then per array: length u32, ids
    /// u32[], then per element: successor count u32, successor indices
    /// u32[] (empty for the last array). All integers little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_size());
        out.extend_from_slice(ODAG_MAGIC);
        out.push(ODAG_VERSION);
        out.extend_from_slice(&(self.depth as u16).to_le_bytes());
        out.extend_from_slice(&(self.key.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.key);
        for (array, succ) in self.arrays.iter().zip(&self.successors) {
            out.extend_from_slice(&(array.len() as u32).to_le_bytes());
            for &id in array {
                out.extend_from_slice(&id.to_le_bytes());
            }
            for per_elem in succ {
                out.extend_from_slice(&(per_elem.len() as u32).to_le_bytes());
                for &s in per_elem {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn serialized_size(&self) -> usize {
        let mut size = 4 + 1 + 2 + 4 + self.key.len();
        for (array, succ) in self.arrays.iter().zip(&self.successors) {
            size += 4 + 4 * array.len();
            for per_elem in succ {
                size += 4 + 4 * per_elem.len();
            }
        }
        size
    }

    pub fn from_bytes(bytes: &[u8], mode: ExplorationMode) -> Result<Odag, OdagError> {
        let mut r = Reader { bytes, at: 0 };
        let magic = r.take(4)?;
        if magic != ODAG_MAGIC {
            return Err(OdagError::Corrupt("bad magic".into()));
        }
        let version = r.u8()?;
        if version != ODAG_VERSION {
            return Err(OdagError::Corrupt(format!("unsupported version {version}")));
        }
        let depth = r.u16()? as usize;
        if depth == 0 {
            return Err(OdagError::Corrupt("zero depth".into()));
        }
        let key_len = r.u32()? as usize;
        let key = r.take(key_len)?.to_vec();
        let mut arrays = Vec::with_capacity(depth);
        let mut successors = Vec::with_capacity(depth);
        for level in 0..depth {
            let len = r.u32()? as usize;
            let mut ids = Vec::with_capacity(len);
            for _ in 0..len {
                ids.push(r.u32()?);
            }
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(OdagError::Corrupt(format!("array {level} not sorted")));
            }
            let mut succ = Vec::with_capacity(len);
            for _ in 0..len {
                let count = r.u32()? as usize;
                let mut indices = Vec::with_capacity(count);
                for _ in 0..count {
                    indices.push(r.u32()?);
                }
                if level + 1 == depth && !indices.is_empty() {
                    return Err(OdagError::Corrupt("last array has successors".into()));
                }
                succ.push(indices);
            }
            arrays.push(ids);
            successors.push(succ);
        }
        for level in 0..depth.saturating_sub(1) {
            let next_len = arrays[level + 1].len() as u32;
            for per_elem in &successors[level] {
                if per_elem.iter().any(|&s| s >= next_len) {
                    return Err(OdagError::Corrupt(format!(
                        "successor index out of range at level {level}"
                    )));
                }
            }
        }
        if r.at != bytes.len() {
            return Err(OdagError::Corrupt("trailing bytes".into()));
        }
        Ok(Odag {
            key,
            mode,
            depth,
            arrays,
            successors,
            stored: 0,
        })
    }
}

impl fmt::Display for Odag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "odag(depth={}, elements={}, links={})",
            self.depth,
            self.arrays.iter().map(Vec::len).sum::<usize>(),
            self.link_count()
        )
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], OdagError> {
        if self.at + n > self.bytes.len() {
            return Err(OdagError::Corrupt("truncated".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, OdagError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, OdagError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, OdagError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// One worker's share of an ODAG's decoded path space: the path indices
/// whose block number is congruent to the worker id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkPartition {
    pub worker: usize,
    pub workers: usize,
    pub block: u64,
}

impl WorkPartition {
    /// The whole path space, for single-worker or test decoding.
    pub fn full() -> Self {
        WorkPartition {
            worker: 0,
            workers: 1,
            block: 1,
        }
    }

    pub fn owns(&self, path_index: u64) -> bool {
        (path_index / self.block) % self.workers as u64 == self.worker as u64
    }

    /// True iff `[start, start+len)` contains any owned path index.
    pub fn intersects(&self, start: u64, len: u64) -> bool {
        if len == 0 {
            return false;
        }
        if self.workers == 1 {
            return true;
        }
        let first_block = start / self.block;
        let last_block = (start + len - 1) / self.block;
        if last_block - first_block + 1 >= self.workers as u64 {
            return true;
        }
        let w = self.worker as u64;
        let ws = self.workers as u64;
        let mut b = first_block;
        loop {
            if b % ws == w {
                return true;
            }
            if b == last_block {
                return false;
            }
            b += 1;
        }
    }

    /// Number of owned path indices in `[0, total)`.
    pub fn owned_count(&self, total: u64) -> u64 {
        let ws = self.workers as u64;
        let w = self.worker as u64;
        let full_rounds = total / (self.block * ws);
        let mut count = full_rounds * self.block;
        let rem_start = full_rounds * self.block * ws;
        let rem = total - rem_start;
        // Remaining partial round: blocks are handed out in worker order.
        let skipped = w * self.block;
        if rem > skipped {
            count += (rem - skipped).min(self.block);
        }
        count
    }
}

/// A plain embedding list with the same serialization conventions as
/// [`Odag`], used for the list storage strategy and for size comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingList {
    key: Vec<u8>,
    depth: usize,
    embeddings: Vec<Embedding>,
}

const LIST_MAGIC: &[u8; 4] = b"ELST";

impl EmbeddingList {
    pub fn new(key: Vec<u8>, depth: usize, embeddings: Vec<Embedding>) -> Self {
        debug_assert!(embeddings.iter().all(|e| e.len() == depth));
        EmbeddingList {
            key,
            depth,
            embeddings,
        }
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_size());
        out.extend_from_slice(LIST_MAGIC);
        out.push(ODAG_VERSION);
        out.extend_from_slice(&(self.depth as u16).to_le_bytes());
        out.extend_from_slice(&(self.key.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.key);
        out.extend_from_slice(&(self.embeddings.len() as u32).to_le_bytes());
        for e in &self.embeddings {
            for &w in e.words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn serialized_size(&self) -> usize {
        4 + 1 + 2 + 4 + self.key.len() + 4 + 4 * self.depth * self.embeddings.len()
    }
}
