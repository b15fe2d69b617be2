//! The filter-process superstep executor.
//!
//! A run proceeds through barrier-synchronized exploration steps. Within a
//! step, workers own disjoint partitions of the frontier, decode frontier
//! embeddings, apply the aggregation filter, emit aggregation-process
//! outputs, extend each survivor by one vertex or edge, and keep exactly the
//! extensions that pass the incremental canonicality check and the filter
//! callback. Kept extensions are processed and accumulated into worker-local
//! per-quick-pattern stores (ODAG builders or lists). At the barrier the
//! engine merges worker outputs, re-keys quick patterns to canonical
//! patterns (one canonization per distinct quick pattern per step, memoized
//! for the rest of the run), reduces aggregation values, and freezes the
//! merged per-canonical-pattern frontier for the next step. The computation
//! ends when the frontier is empty.
//!
//! Shared state is read-only during the parallel phase; the pattern memo and
//! aggregate snapshots are mutated only between barriers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Display;
use std::fs;
use std::io::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::canonical::{is_canonical_extension_any, is_canonical_extension_counting};
use crate::embedding::{extend_candidates, Embedding, ExplorationMode};
use crate::graph::InputGraph;
use crate::odag::{EmbeddingList, Odag, OdagBuilder, OdagError, WorkPartition};
use crate::pattern::{
    canonical_pattern, quick_pattern, AutomorphismCache, Pattern, PatternError, SlotMapping,
    DEFAULT_MAX_PATTERN_SIZE,
};

/// Values carried through keyed aggregation. Reduction happens bottom-up and
/// in worker-dependent grouping, so the application's reduce must be
/// associative and commutative for outputs to be independent of the worker
/// count.
pub trait AggValue: Clone + Send + Sync + PartialEq + std::fmt::Debug + Display + 'static {
    /// Re-index a slot-structured value through a pattern slot bijection.
    /// Plain scalars return themselves.
    fn remap_slots(&self, mapping: &SlotMapping) -> Self;
}

impl AggValue for i64 {
    fn remap_slots(&self, _mapping: &SlotMapping) -> i64 {
        *self
    }
}

/// Application callback bundle.
///
/// `filter` and `aggregation_filter` must be anti-monotonic (false for an
/// embedding implies false for all its extensions) and all callbacks must be
/// automorphism-invariant (equal results for embeddings with the same vertex
/// and edge sets). The optional debug harness samples embeddings and checks
/// the latter.
pub trait Application: Sized + Send + Sync {
    /// Value type for step-scoped aggregation (`map`/`read_*_aggregate`).
    type MapValue: AggValue;
    /// Value type for output aggregation (`map_output_*`), reduced once at
    /// the end of the computation.
    type OutputValue: AggValue;

    fn mode(&self) -> ExplorationMode;

    /// φ — examines a candidate; false prunes it and all extensions.
    fn filter(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding) -> bool;

    /// π — processes a kept candidate; may call `output_*` and `map_*`.
    fn process(&self, ctx: &mut Ctx<'_, Self>, e: &Embedding);

    /// α — examined at the start of the step after generation, when the
    /// previous step's aggregates are readable. Default: keep everything.
    fn aggregation_filter(&self, _ctx: &mut Ctx<'_, Self>, _e: &Embedding) -> bool {
        true
    }

    /// β — runs right after α accepts; may call `output_*` and `map_*`.
    fn aggregation_process(&self, _ctx: &mut Ctx<'_, Self>, _e: &Embedding) {}

    /// Applied after `process`, before the embedding enters the next
    /// frontier; false halts its exploration.
    fn termination_filter(&self, _g: &InputGraph, _e: &Embedding) -> bool {
        true
    }

    /// Merges one mapped value into the accumulator (associative and
    /// commutative).
    fn reduce(&self, acc: &mut Self::MapValue, value: Self::MapValue);

    /// Merges one output-mapped value into the accumulator (associative and
    /// commutative).
    fn reduce_output(&self, acc: &mut Self::OutputValue, value: Self::OutputValue);
}

/// Frontier storage strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Odag,
    List,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub workers: usize,
    /// Work-partition block size, in decoded embeddings.
    pub block_size: u64,
    pub storage: Storage,
    pub max_pattern_size: usize,
    /// Sample embeddings and verify callback automorphism invariance.
    pub debug_checks: bool,
    /// After every barrier, re-extract each frozen ODAG and require exact
    /// equality with the stored embedding set. Assumes `filter` does not
    /// read aggregates. Odag storage only.
    pub verify_roundtrip: bool,
    /// Collect processed and alpha-passing embeddings into the report.
    pub collect_embeddings: bool,
    /// Collect raw pattern-keyed map calls and per-step reduced aggregates
    /// into the report.
    pub collect_map_calls: bool,
    /// Where to write embeddings.txt, aggregates.txt, output_aggregates.txt
    /// and summary.txt. With `None`, output lines are collected in the
    /// report instead.
    pub out_dir: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            block_size: 1024,
            storage: Storage::Odag,
            max_pattern_size: DEFAULT_MAX_PATTERN_SIZE,
            debug_checks: false,
            verify_roundtrip: false,
            collect_embeddings: false,
            collect_map_calls: false,
            out_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("step {step}: embedding reaches {size} vertices, over the pattern-size cap {max}")]
    PatternSizeExceeded { step: usize, size: usize, max: usize },
    #[error("step {step}: callback panicked on embedding [{embedding}]: {message}")]
    CallbackPanic {
        step: usize,
        embedding: String,
        message: String,
    },
    #[error("step {step}: automorphism-invariance violation: {callback} differs on reorderings of [{embedding}]")]
    InvarianceViolation {
        step: usize,
        callback: &'static str,
        embedding: String,
    },
    #[error("step {step}: frontier round trip mismatch for {pattern} (stored {stored}, extracted {extracted})")]
    RoundTripMismatch {
        step: usize,
        pattern: String,
        stored: usize,
        extracted: usize,
    },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Odag(#[from] OdagError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Run-level memo from quick-pattern key bytes to canonical pattern and the
/// realizing slot bijection. Mutated only at step barriers; workers read it
/// during parallel phases. Counts actual canonization computations.
#[derive(Debug)]
pub struct PatternMemo {
    map: HashMap<Vec<u8>, Arc<(Pattern, SlotMapping)>>,
    max_size: usize,
    step_calls: u64,
    total_calls: u64,
}

impl PatternMemo {
    pub fn new(max_size: usize) -> Self {
        PatternMemo {
            map: HashMap::new(),
            max_size,
            step_calls: 0,
            total_calls: 0,
        }
    }

    pub fn lookup(&self, quick_key: &[u8]) -> Option<&Arc<(Pattern, SlotMapping)>> {
        self.map.get(quick_key)
    }

    pub fn canonical_for(&mut self, quick: &Pattern) -> Result<Arc<(Pattern, SlotMapping)>, PatternError> {
        let key = quick.key();
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let computed = Arc::new(canonical_pattern(quick, self.max_size)?);
        self.step_calls += 1;
        self.total_calls += 1;
        self.map.insert(key, computed.clone());
        Ok(computed)
    }

    pub fn begin_step(&mut self) {
        self.step_calls = 0;
    }

    pub fn step_calls(&self) -> u64 {
        self.step_calls
    }

    pub fn total_calls(&self) -> u64 {
        self.total_calls
    }
}

/// Read side of keyed aggregation: the previous step's reduced values.
#[derive(Debug)]
pub struct AggregateSnapshot<V> {
    pub by_pattern: BTreeMap<Vec<u8>, (Arc<Pattern>, V)>,
    pub by_int: BTreeMap<i64, V>,
}

impl<V> Default for AggregateSnapshot<V> {
    fn default() -> Self {
        AggregateSnapshot {
            by_pattern: BTreeMap::new(),
            by_int: BTreeMap::new(),
        }
    }
}

/// Result of one two-level reduction.
pub struct TwoLevelResult<V> {
    pub by_canonical: BTreeMap<Vec<u8>, (Arc<Pattern>, V)>,
    /// Quick-pattern keys that fed the reduction.
    pub quick_keys: BTreeSet<Vec<u8>>,
}

/// Two-level pattern aggregation: worker-local maps are already grouped and
/// pre-reduced by quick pattern; this merges them across workers by quick
/// key, canonizes each distinct quick pattern once (via the memo), re-keys
/// the groups, re-indexes slot-structured values through the slot mapping,
/// and reduces into per-canonical-pattern aggregates. Equivalent to reducing
/// every raw map call directly under its canonical pattern.
pub fn two_level_reduce<V: AggValue>(
    locals: Vec<BTreeMap<Vec<u8>, (Pattern, V)>>,
    memo: &mut PatternMemo,
    mut reduce: impl FnMut(&mut V, V),
) -> Result<TwoLevelResult<V>, PatternError> {
    let mut by_quick: BTreeMap<Vec<u8>, (Pattern, V)> = BTreeMap::new();
    for local in locals {
        for (key, (pattern, value)) in local {
            match by_quick.entry(key) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((pattern, value));
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    reduce(&mut slot.get_mut().1, value);
                }
            }
        }
    }

    let mut result = TwoLevelResult {
        by_canonical: BTreeMap::new(),
        quick_keys: BTreeSet::new(),
    };
    for (quick_key, (quick, value)) in by_quick {
        let canon = memo.canonical_for(&quick)?;
        let remapped = value.remap_slots(&canon.1);
        result.quick_keys.insert(quick_key);
        match result.by_canonical.entry(canon.0.key()) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert((Arc::new(canon.0.clone()), remapped));
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                reduce(&mut slot.get_mut().1, remapped);
            }
        }
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct StepStats {
    pub step: usize,
    /// Candidates that passed canonicality and φ and were processed.
    pub processed: u64,
    /// Frontier members that passed α.
    pub alpha_passed: u64,
    /// Size of the next frontier after termination filtering.
    pub frontier: u64,
    /// Distinct quick patterns touched this step (aggregation keys and
    /// frontier groups).
    pub quick_patterns: u64,
    pub canonical_patterns: u64,
    /// Actual canonization computations this step.
    pub canonize_calls: u64,
    /// Decoded frontier paths discarded by re-checking (spurious).
    pub decoded_rejected: u64,
    pub frontier_odag_bytes: u64,
    pub frontier_list_bytes: u64,
    pub elapsed: Duration,
}

/// Everything a run produces besides its output files.
pub struct RunReport<A: Application> {
    pub steps: Vec<StepStats>,
    /// Pattern-keyed map aggregates accumulated across all steps.
    pub pattern_aggregates: Vec<(Arc<Pattern>, A::MapValue)>,
    pub int_aggregates: Vec<(i64, A::MapValue)>,
    /// Final output aggregation (reduced once, at the end).
    pub output_pattern_aggregates: Vec<(Arc<Pattern>, A::OutputValue)>,
    pub output_int_aggregates: Vec<(i64, A::OutputValue)>,
    /// π-processed embeddings (collect_embeddings).
    pub processed: Vec<Embedding>,
    /// α-passing frontier members (collect_embeddings).
    pub alpha_passed: Vec<Embedding>,
    /// Raw pattern-keyed map calls per step (collect_map_calls).
    pub map_calls: Vec<Vec<(Pattern, A::MapValue)>>,
    /// Reduced pattern aggregates per step (collect_map_calls).
    pub step_pattern_aggregates: Vec<Vec<(Arc<Pattern>, A::MapValue)>>,
    /// Output lines in barrier order (only when no out_dir is set).
    pub output_lines: Vec<String>,
    pub output_lines_total: u64,
    /// Steps whose frontier ODAGs were re-extracted and matched exactly.
    pub roundtrip_verified_steps: u64,
}

impl<A: Application> Default for RunReport<A> {
    fn default() -> Self {
        RunReport {
            steps: Vec::new(),
            pattern_aggregates: Vec::new(),
            int_aggregates: Vec::new(),
            output_pattern_aggregates: Vec::new(),
            output_int_aggregates: Vec::new(),
            processed: Vec::new(),
            alpha_passed: Vec::new(),
            map_calls: Vec::new(),
            step_pattern_aggregates: Vec::new(),
            output_lines: Vec::new(),
            output_lines_total: 0,
            roundtrip_verified_steps: 0,
        }
    }
}

/// Callback-visible context: graph access, the output channel, keyed
/// aggregation (`map_*`), and reads of the previous step's aggregates.
pub struct Ctx<'a, A: Application> {
    g: &'a InputGraph,
    app: &'a A,
    step: usize,
    read: &'a AggregateSnapshot<A::MapValue>,
    aut_cache: &'a mut AutomorphismCache,
    map_pattern: BTreeMap<Vec<u8>, (Pattern, A::MapValue)>,
    map_int: BTreeMap<i64, A::MapValue>,
    out_pattern: BTreeMap<Vec<u8>, (Pattern, A::OutputValue)>,
    out_int: BTreeMap<i64, A::OutputValue>,
    outputs: Vec<String>,
    raw_map_calls: Option<Vec<(Pattern, A::MapValue)>>,
    current_quick: Option<(Vec<u32>, Pattern, Vec<u32>)>,
    member_key: Option<Vec<u8>>,
}

impl<'a, A: Application> Ctx<'a, A> {
    fn new(
        g: &'a InputGraph,
        app: &'a A,
        step: usize,
        read: &'a AggregateSnapshot<A::MapValue>,
        aut_cache: &'a mut AutomorphismCache,
        collect_map_calls: bool,
    ) -> Self {
        Ctx {
            g,
            app,
            step,
            read,
            aut_cache,
            map_pattern: BTreeMap::new(),
            map_int: BTreeMap::new(),
            out_pattern: BTreeMap::new(),
            out_int: BTreeMap::new(),
            outputs: Vec::new(),
            raw_map_calls: collect_map_calls.then(Vec::new),
            current_quick: None,
            member_key: None,
        }
    }

    pub fn graph(&self) -> &InputGraph {
        self.g
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Appends a raw line to the output channel; flushed sorted at the step
    /// barrier.
    pub fn output_line(&mut self, line: impl Into<String>) {
        self.outputs.push(line.into());
    }

    /// Appends the embedding's textual rendering to the output channel.
    pub fn output_embedding(&mut self, e: &Embedding) {
        let line = e.render(self.g);
        self.outputs.push(line);
    }

    /// Adds a value to the aggregation group of the embedding's pattern.
    /// Grouped locally by quick pattern; re-keyed to the canonical pattern
    /// at the barrier. Readable via `read_pattern_aggregate` one step later.
    pub fn map_pattern(&mut self, e: &Embedding, value: A::MapValue) {
        let (quick, _) = self.quick_of(e);
        if let Some(log) = &mut self.raw_map_calls {
            log.push((quick.clone(), value.clone()));
        }
        let app = self.app;
        match self.map_pattern.entry(quick.key()) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert((quick, value));
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                app.reduce(&mut slot.get_mut().1, value);
            }
        }
    }

    /// Adds a value to an integer-keyed aggregation group.
    pub fn map_int(&mut self, key: i64, value: A::MapValue) {
        let app = self.app;
        match self.map_int.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                app.reduce(slot.get_mut(), value);
            }
        }
    }

    /// Adds a value to the output aggregation group of the embedding's
    /// pattern; reduced once when the computation ends.
    pub fn map_output_pattern(&mut self, e: &Embedding, value: A::OutputValue) {
        let (quick, _) = self.quick_of(e);
        let app = self.app;
        match self.out_pattern.entry(quick.key()) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert((quick, value));
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                app.reduce_output(&mut slot.get_mut().1, value);
            }
        }
    }

    pub fn map_output_int(&mut self, key: i64, value: A::OutputValue) {
        let app = self.app;
        match self.out_int.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                app.reduce_output(slot.get_mut(), value);
            }
        }
    }

    /// Previous-step aggregate for the pattern of the frontier member
    /// currently under α/β evaluation. `None` outside that context or for a
    /// never-aggregated pattern.
    pub fn read_pattern_aggregate(&self) -> Option<&A::MapValue> {
        let key = self.member_key.as_ref()?;
        self.read.by_pattern.get(key).map(|(_, v)| v)
    }

    /// Previous-step aggregate under an integer key.
    pub fn read_int_aggregate(&self, key: i64) -> Option<&A::MapValue> {
        self.read.by_int.get(&key)
    }

    /// Quick pattern of the embedding plus its slot-to-vertex assignment,
    /// cached while the engine works on one embedding.
    pub fn quick_of(&mut self, e: &Embedding) -> (Pattern, Vec<u32>) {
        let valid = matches!(&self.current_quick, Some((words, _, _)) if words == e.words());
        if !valid {
            let (p, sv) = quick_pattern(self.g, e);
            self.current_quick = Some((e.words().to_vec(), p, sv));
        }
        let (_, p, sv) = self.current_quick.as_ref().unwrap();
        (p.clone(), sv.clone())
    }

    /// Automorphism group of a pattern, cached per worker.
    pub fn automorphism_group(&mut self, p: &Pattern) -> Arc<Vec<SlotMapping>> {
        self.aut_cache.get(p)
    }

    fn begin_candidate(&mut self) {
        self.current_quick = None;
        self.member_key = None;
    }

    fn begin_member(&mut self, key: &[u8]) {
        self.current_quick = None;
        self.member_key = Some(key.to_vec());
    }
}

enum Frontier {
    Initial,
    Groups(Vec<FrontierGroup>),
}

struct FrontierGroup {
    key: Vec<u8>,
    pattern: Arc<Pattern>,
    store: GroupStore,
}

enum GroupStore {
    Odag(Odag),
    List(Vec<Embedding>),
}

enum LocalStore {
    Odag(OdagBuilder),
    List(Vec<Embedding>),
}

impl LocalStore {
    fn insert(&mut self, e: &Embedding) -> Result<(), OdagError> {
        match self {
            LocalStore::Odag(b) => b.insert(e),
            LocalStore::List(v) => {
                v.push(e.clone());
                Ok(())
            }
        }
    }

}

struct WorkerYield<A: Application> {
    map_pattern: BTreeMap<Vec<u8>, (Pattern, A::MapValue)>,
    map_int: BTreeMap<i64, A::MapValue>,
    out_pattern: BTreeMap<Vec<u8>, (Pattern, A::OutputValue)>,
    out_int: BTreeMap<i64, A::OutputValue>,
    outputs: Vec<String>,
    frontier_local: BTreeMap<Vec<u8>, (Pattern, LocalStore)>,
    processed: u64,
    alpha_passed: u64,
    decoded_rejected: u64,
    collected_processed: Vec<Embedding>,
    collected_alpha: Vec<Embedding>,
    raw_map_calls: Vec<(Pattern, A::MapValue)>,
    kept: Vec<Embedding>,
}

/// Runs the application to completion: supersteps until the frontier
/// empties, then final aggregation and output files.
pub fn run<A: Application>(
    g: &InputGraph,
    app: &A,
    config: &EngineConfig,
) -> Result<RunReport<A>, EngineError> {
    assert!(config.workers >= 1, "workers must be >= 1");
    assert!(config.block_size >= 1, "block size must be >= 1");
    let mut engine = Engine::new(g, app, config)?;
    while engine.has_work() {
        engine.superstep()?;
    }
    engine.finish()
}

struct Engine<'a, A: Application> {
    g: &'a InputGraph,
    app: &'a A,
    cfg: &'a EngineConfig,
    mode: ExplorationMode,
    step: usize,
    frontier: Frontier,
    prev: AggregateSnapshot<A::MapValue>,
    memo: PatternMemo,
    aut_caches: Vec<AutomorphismCache>,
    history_pattern: BTreeMap<Vec<u8>, (Arc<Pattern>, A::MapValue)>,
    history_int: BTreeMap<i64, A::MapValue>,
    out_pattern_store: BTreeMap<Vec<u8>, (Arc<Pattern>, A::OutputValue)>,
    out_int_store: BTreeMap<i64, A::OutputValue>,
    writer: Option<io::BufWriter<fs::File>>,
    report: RunReport<A>,
}

impl<'a, A: Application> Engine<'a, A> {
    fn new(g: &'a InputGraph, app: &'a A, cfg: &'a EngineConfig) -> Result<Self, EngineError> {
        let writer = match &cfg.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let file = fs::File::create(dir.join("embeddings.txt"))?;
                Some(io::BufWriter::new(file))
            }
            None => None,
        };
        Ok(Engine {
            g,
            app,
            cfg,
            mode: app.mode(),
            step: 0,
            frontier: Frontier::Initial,
            prev: AggregateSnapshot::default(),
            memo: PatternMemo::new(cfg.max_pattern_size),
            aut_caches: (0..cfg.workers).map(|_| AutomorphismCache::default()).collect(),
            history_pattern: BTreeMap::new(),
            history_int: BTreeMap::new(),
            out_pattern_store: BTreeMap::new(),
            out_int_store: BTreeMap::new(),
            writer,
            report: RunReport::default(),
        })
    }

    fn has_work(&self) -> bool {
        match &self.frontier {
            Frontier::Initial => match self.mode {
                ExplorationMode::VertexInduced => self.g.num_vertices() > 0,
                ExplorationMode::EdgeInduced => self.g.num_edges() > 0,
            },
            Frontier::Groups(groups) => !groups.is_empty(),
        }
    }

    /// One exploration step: parallel phase over frontier partitions, then
    /// the barrier (merge, two-level reduce, frontier freeze).
    fn superstep(&mut self) -> Result<(), EngineError> {
        self.step += 1;
        let started = Instant::now();
        let step = self.step;
        let workers = self.cfg.workers;

        let yields: Vec<WorkerYield<A>> = {
            let g = self.g;
            let app = self.app;
            let cfg = self.cfg;
            let mode = self.mode;
            let frontier = &self.frontier;
            let prev = &self.prev;
            let memo = &self.memo;
            let results: Vec<Result<WorkerYield<A>, EngineError>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = self
                        .aut_caches
                        .iter_mut()
                        .enumerate()
                        .map(|(w, cache)| {
                            scope.spawn(move || {
                                worker_step(g, app, cfg, mode, step, w, frontier, prev, memo, cache)
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| match h.join() {
                            Ok(r) => r,
                            Err(payload) => Err(EngineError::CallbackPanic {
                                step,
                                embedding: "<unknown>".to_string(),
                                message: panic_message(payload.as_ref()),
                            }),
                        })
                        .collect()
                });
            let mut collected = Vec::with_capacity(workers);
            for r in results {
                collected.push(r?);
            }
            collected
        };

        self.barrier(yields, started)
    }

    fn barrier(
        &mut self,
        mut yields: Vec<WorkerYield<A>>,
        started: Instant,
    ) -> Result<(), EngineError> {
        self.memo.begin_step();
        let mut quick_keys: BTreeSet<Vec<u8>> = BTreeSet::new();
        let mut canonical_keys: BTreeSet<Vec<u8>> = BTreeSet::new();

        // Output channel: merge, sort, flush.
        let mut lines: Vec<String> = Vec::new();
        for y in &mut yields {
            lines.append(&mut y.outputs);
        }
        lines.sort_unstable();
        self.report.output_lines_total += lines.len() as u64;
        match &mut self.writer {
            Some(w) => {
                for line in &lines {
                    writeln!(w, "{line}")?;
                }
                w.flush()?;
            }
            None => self.report.output_lines.extend(lines),
        }

        // Step-scoped pattern aggregation (two-level) and int aggregation.
        let locals: Vec<BTreeMap<Vec<u8>, (Pattern, A::MapValue)>> =
            yields.iter_mut().map(|y| std::mem::take(&mut y.map_pattern)).collect();
        let app = self.app;
        let reduced = two_level_reduce(locals, &mut self.memo, |acc, v| app.reduce(acc, v))?;
        quick_keys.extend(reduced.quick_keys.iter().cloned());
        canonical_keys.extend(reduced.by_canonical.keys().cloned());
        if self.cfg.collect_map_calls {
            let mut raw = Vec::new();
            for y in &mut yields {
                raw.append(&mut y.raw_map_calls);
            }
            self.report.map_calls.push(raw);
            self.report.step_pattern_aggregates.push(
                reduced
                    .by_canonical
                    .values()
                    .map(|(p, v)| (p.clone(), v.clone()))
                    .collect(),
            );
        }
        for (key, (pattern, value)) in &reduced.by_canonical {
            match self.history_pattern.entry(key.clone()) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((pattern.clone(), value.clone()));
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    app.reduce(&mut slot.get_mut().1, value.clone());
                }
            }
        }

        let mut int_aggs: BTreeMap<i64, A::MapValue> = BTreeMap::new();
        for y in &mut yields {
            for (k, v) in std::mem::take(&mut y.map_int) {
                match int_aggs.entry(k) {
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        slot.insert(v);
                    }
                    std::collections::btree_map::Entry::Occupied(mut slot) => {
                        app.reduce(slot.get_mut(), v);
                    }
                }
            }
        }
        for (k, v) in &int_aggs {
            match self.history_int.entry(*k) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(v.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    app.reduce(slot.get_mut(), v.clone());
                }
            }
        }

        // Output aggregation: accumulate into the run-level store.
        let out_locals: Vec<BTreeMap<Vec<u8>, (Pattern, A::OutputValue)>> =
            yields.iter_mut().map(|y| std::mem::take(&mut y.out_pattern)).collect();
        let out_reduced =
            two_level_reduce(out_locals, &mut self.memo, |acc, v| app.reduce_output(acc, v))?;
        quick_keys.extend(out_reduced.quick_keys.iter().cloned());
        canonical_keys.extend(out_reduced.by_canonical.keys().cloned());
        for (key, (pattern, value)) in out_reduced.by_canonical {
            match self.out_pattern_store.entry(key) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((pattern, value));
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    app.reduce_output(&mut slot.get_mut().1, value);
                }
            }
        }
        for y in &mut yields {
            for (k, v) in std::mem::take(&mut y.out_int) {
                match self.out_int_store.entry(k) {
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        slot.insert(v);
                    }
                    std::collections::btree_map::Entry::Occupied(mut slot) => {
                        app.reduce_output(slot.get_mut(), v);
                    }
                }
            }
        }

        // Frontier: merge worker-local quick-keyed stores, re-key to
        // canonical patterns, freeze.
        let mut by_quick: BTreeMap<Vec<u8>, (Pattern, Vec<LocalStore>)> = BTreeMap::new();
        for y in &mut yields {
            for (key, (pattern, store)) in std::mem::take(&mut y.frontier_local) {
                by_quick.entry(key).or_insert_with(|| (pattern, Vec::new())).1.push(store);
            }
        }
        let mut by_canonical: BTreeMap<Vec<u8>, (Arc<Pattern>, Vec<LocalStore>)> = BTreeMap::new();
        for (quick_key, (quick, stores)) in by_quick {
            let canon = self.memo.canonical_for(&quick)?;
            quick_keys.insert(quick_key);
            let ckey = canon.0.key();
            canonical_keys.insert(ckey.clone());
            by_canonical
                .entry(ckey)
                .or_insert_with(|| (Arc::new(canon.0.clone()), Vec::new()))
                .1
                .extend(stores);
        }

        let mut frontier_size = 0u64;
        let mut odag_bytes = 0u64;
        let mut list_bytes = 0u64;
        let mut groups = Vec::new();
        for (key, (pattern, stores)) in by_canonical {
            let mut merged: Option<LocalStore> = None;
            for store in stores {
                match (&mut merged, store) {
                    (None, s) => merged = Some(s),
                    (Some(LocalStore::Odag(acc)), LocalStore::Odag(b)) => acc.merge(b)?,
                    (Some(LocalStore::List(acc)), LocalStore::List(mut v)) => acc.append(&mut v),
                    _ => unreachable!("mixed storage strategies within one step"),
                }
            }
            let store = match merged.expect("at least one store per key") {
                LocalStore::Odag(builder) => {
                    frontier_size += builder.inserted();
                    let odag = builder.freeze(key.clone());
                    odag_bytes += odag.serialized_size() as u64;
                    list_bytes +=
                        EmbeddingList::new(key.clone(), odag.depth(), Vec::new()).serialized_size()
                            as u64
                            + 4 * odag.depth() as u64 * odag.stored();
                    GroupStore::Odag(odag)
                }
                LocalStore::List(mut v) => {
                    v.sort_unstable();
                    frontier_size += v.len() as u64;
                    list_bytes += EmbeddingList::new(key.clone(), v.first().map_or(0, Embedding::len), v.clone())
                        .serialized_size() as u64;
                    GroupStore::List(v)
                }
            };
            groups.push(FrontierGroup {
                key,
                pattern,
                store,
            });
        }

        // Optional exact round-trip verification of the frozen ODAGs.
        if self.cfg.verify_roundtrip && self.cfg.storage == Storage::Odag {
            let mut kept: BTreeMap<Vec<u8>, BTreeSet<Embedding>> = BTreeMap::new();
            for y in &mut yields {
                for e in std::mem::take(&mut y.kept) {
                    let (quick, _) = quick_pattern(self.g, &e);
                    let canon = self
                        .memo
                        .lookup(&quick.key())
                        .expect("kept embedding pattern canonized this barrier");
                    kept.entry(canon.0.key()).or_default().insert(e);
                }
            }
            for group in &groups {
                let GroupStore::Odag(odag) = &group.store else { continue };
                let expected = kept.remove(&group.key).unwrap_or_default();
                let extracted = self.reextract(odag, &group.key)?;
                if extracted != expected {
                    return Err(EngineError::RoundTripMismatch {
                        step: self.step,
                        pattern: group.pattern.render(),
                        stored: expected.len(),
                        extracted: extracted.len(),
                    });
                }
            }
            self.report.roundtrip_verified_steps += 1;
        }

        let decoded_rejected: u64 = yields.iter().map(|y| y.decoded_rejected).sum();
        let processed: u64 = yields.iter().map(|y| y.processed).sum();
        let alpha_passed: u64 = yields.iter().map(|y| y.alpha_passed).sum();
        if self.cfg.collect_embeddings {
            for y in &mut yields {
                self.report.processed.append(&mut y.collected_processed);
                self.report.alpha_passed.append(&mut y.collected_alpha);
            }
        }

        self.frontier = Frontier::Groups(groups);
        self.prev = AggregateSnapshot {
            by_pattern: reduced.by_canonical,
            by_int: int_aggs,
        };

        self.report.steps.push(StepStats {
            step: self.step,
            processed,
            alpha_passed,
            frontier: frontier_size,
            quick_patterns: quick_keys.len() as u64,
            canonical_patterns: canonical_keys.len() as u64,
            canonize_calls: self.memo.step_calls(),
            decoded_rejected,
            frontier_odag_bytes: odag_bytes,
            frontier_list_bytes: list_bytes,
            elapsed: started.elapsed(),
        });
        Ok(())
    }

    /// Re-extracts a frozen ODAG with the insertion-time predicates
    /// (canonicality, φ, pattern identity, termination) and returns the
    /// decoded set.
    fn reextract(&mut self, odag: &Odag, key: &[u8]) -> Result<BTreeSet<Embedding>, EngineError> {
        let mut cache = AutomorphismCache::default();
        let mut ctx = Ctx::new(self.g, self.app, self.step, &self.prev, &mut cache, false);
        let mut out = BTreeSet::new();
        let mut failure: Option<EngineError> = None;
        odag.extract(&WorkPartition::full(), &mut |e, is_full| {
            if failure.is_some() {
                return false;
            }
            match decode_check(self.g, self.app, &mut ctx, &self.memo, e, is_full, key, self.step) {
                Ok(DecodeVerdict::Reject) => false,
                Ok(DecodeVerdict::Descend) => true,
                Ok(DecodeVerdict::Accept) => {
                    out.insert(e.clone());
                    true
                }
                Err(err) => {
                    failure = Some(err);
                    false
                }
            }
        });
        match failure {
            Some(err) => Err(err),
            None => Ok(out),
        }
    }

    fn finish(mut self) -> Result<RunReport<A>, EngineError> {
        self.report.pattern_aggregates = self
            .history_pattern
            .into_values()
            .collect();
        self.report.int_aggregates = self.history_int.into_iter().collect();
        self.report.output_pattern_aggregates = self.out_pattern_store.into_values().collect();
        self.report.output_int_aggregates = self.out_int_store.into_iter().collect();

        if let Some(dir) = &self.cfg.out_dir {
            if let Some(w) = &mut self.writer {
                w.flush()?;
            }
            let mut agg = String::new();
            for (p, v) in &self.report.pattern_aggregates {
                agg.push_str(&format!("{}\t{}\n", p.render(), v));
            }
            for (k, v) in &self.report.int_aggregates {
                agg.push_str(&format!("{k}\t{v}\n"));
            }
            fs::write(dir.join("aggregates.txt"), agg)?;

            let mut out_agg = String::new();
            for (p, v) in &self.report.output_pattern_aggregates {
                out_agg.push_str(&format!("{}\t{}\n", p.render(), v));
            }
            for (k, v) in &self.report.output_int_aggregates {
                out_agg.push_str(&format!("{k}\t{v}\n"));
            }
            fs::write(dir.join("output_aggregates.txt"), out_agg)?;
        }
        Ok(self.report)
    }
}

enum DecodeVerdict {
    Reject,
    Descend,
    Accept,
}

/// Prefix and full-depth checks applied to decoded ODAG paths: distinct
/// ids, connectivity of the extension, incremental canonicality, φ; at full
/// depth additionally pattern identity and the termination filter. α is the
/// caller's concern (it differs between live extraction and verification).
#[allow(clippy::too_many_arguments)]
fn decode_check<A: Application>(
    g: &InputGraph,
    app: &A,
    ctx: &mut Ctx<'_, A>,
    memo: &PatternMemo,
    e: &Embedding,
    is_full: bool,
    key: &[u8],
    step: usize,
) -> Result<DecodeVerdict, EngineError> {
    let words = e.words();
    let last = *words.last().expect("nonempty decode prefix");
    let prefix = &words[..words.len() - 1];
    if prefix.contains(&last) {
        return Ok(DecodeVerdict::Reject);
    }
    if !prefix.is_empty() {
        let connected = match e.mode() {
            ExplorationMode::VertexInduced => prefix.iter().any(|&w| g.are_adjacent(w, last)),
            ExplorationMode::EdgeInduced => {
                prefix.iter().any(|&w| g.edges_share_endpoint(w, last))
            }
        };
        if !connected {
            return Ok(DecodeVerdict::Reject);
        }
        let canonical = match e.mode() {
            ExplorationMode::VertexInduced => {
                is_canonical_extension_counting(g, &Embedding::new(e.mode(), prefix.to_vec()), last).0
            }
            ExplorationMode::EdgeInduced => crate::canonical::is_canonical_extension_edges(
                g,
                &Embedding::new(e.mode(), prefix.to_vec()),
                last,
            ),
        };
        if !canonical {
            return Ok(DecodeVerdict::Reject);
        }
    }
    ctx.begin_candidate();
    let keep = catch_callback(step, g, e, "filter", || app.filter(ctx, e))?;
    if !keep {
        return Ok(DecodeVerdict::Reject);
    }
    if !is_full {
        return Ok(DecodeVerdict::Descend);
    }
    let (quick, _) = ctx.quick_of(e);
    match memo.lookup(&quick.key()) {
        Some(canon) if canon.0.key() == key => {}
        _ => return Ok(DecodeVerdict::Reject),
    }
    if !catch_callback(step, g, e, "termination_filter", || app.termination_filter(g, e))? {
        return Ok(DecodeVerdict::Reject);
    }
    Ok(DecodeVerdict::Accept)
}

#[allow(clippy::too_many_arguments)]
fn worker_step<A: Application>(
    g: &InputGraph,
    app: &A,
    cfg: &EngineConfig,
    mode: ExplorationMode,
    step: usize,
    worker: usize,
    frontier: &Frontier,
    prev: &AggregateSnapshot<A::MapValue>,
    memo: &PatternMemo,
    aut_cache: &mut AutomorphismCache,
) -> Result<WorkerYield<A>, EngineError> {
    let mut ctx = Ctx::new(g, app, step, prev, aut_cache, cfg.collect_map_calls);
    let mut state = WorkerState {
        cfg,
        step,
        mode,
        frontier_local: BTreeMap::new(),
        processed: 0,
        alpha_passed: 0,
        decoded_rejected: 0,
        collected_processed: Vec::new(),
        collected_alpha: Vec::new(),
        kept: Vec::new(),
        rng: 0x9e3779b97f4a7c15u64
            .wrapping_mul(step as u64 + 1)
            .wrapping_add(worker as u64),
        sample_tick: 0,
    };
    let part = WorkPartition {
        worker,
        workers: cfg.workers,
        block: cfg.block_size,
    };

    match frontier {
        Frontier::Initial => {
            let total = match mode {
                ExplorationMode::VertexInduced => g.num_vertices(),
                ExplorationMode::EdgeInduced => g.num_edges(),
            };
            for id in 0..total as u32 {
                if !part.owns(id as u64) {
                    continue;
                }
                let e = Embedding::single(mode, id);
                candidate_flow(g, app, &mut ctx, &mut state, &e)?;
            }
        }
        Frontier::Groups(groups) => {
            for group in groups {
                match &group.store {
                    GroupStore::List(embeddings) => {
                        for (i, e) in embeddings.iter().enumerate() {
                            if !part.owns(i as u64) {
                                continue;
                            }
                            member_flow(g, app, &mut ctx, &mut state, &group.key, e)?;
                        }
                    }
                    GroupStore::Odag(odag) => {
                        let mut failure: Option<EngineError> = None;
                        odag.extract(&part, &mut |e, is_full| {
                            if failure.is_some() {
                                return false;
                            }
                            let verdict = decode_check(
                                g, app, &mut ctx, memo, e, is_full, &group.key, step,
                            )
                            .and_then(|v| match v {
                                DecodeVerdict::Reject => {
                                    if is_full {
                                        state.decoded_rejected += 1;
                                    }
                                    Ok(false)
                                }
                                DecodeVerdict::Descend => Ok(true),
                                DecodeVerdict::Accept => {
                                    member_flow(g, app, &mut ctx, &mut state, &group.key, e)?;
                                    Ok(true)
                                }
                            });
                            match verdict {
                                Ok(descend) => descend,
                                Err(err) => {
                                    failure = Some(err);
                                    false
                                }
                            }
                        });
                        if let Some(err) = failure {
                            return Err(err);
                        }
                    }
                }
            }
        }
    }

    Ok(WorkerYield {
        map_pattern: ctx.map_pattern,
        map_int: ctx.map_int,
        out_pattern: ctx.out_pattern,
        out_int: ctx.out_int,
        outputs: ctx.outputs,
        frontier_local: state.frontier_local,
        processed: state.processed,
        alpha_passed: state.alpha_passed,
        decoded_rejected: state.decoded_rejected,
        collected_processed: state.collected_processed,
        collected_alpha: state.collected_alpha,
        raw_map_calls: ctx.raw_map_calls.unwrap_or_default(),
        kept: state.kept,
    })
}

struct WorkerState<'a> {
    cfg: &'a EngineConfig,
    step: usize,
    mode: ExplorationMode,
    frontier_local: BTreeMap<Vec<u8>, (Pattern, LocalStore)>,
    processed: u64,
    alpha_passed: u64,
    decoded_rejected: u64,
    collected_processed: Vec<Embedding>,
    collected_alpha: Vec<Embedding>,
    kept: Vec<Embedding>,
    rng: u64,
    sample_tick: u64,
}

/// α, β, then one-id extensions for a frontier member. Decoded members
/// arrive here only after the full-depth decode checks.
fn member_flow<A: Application>(
    g: &InputGraph,
    app: &A,
    ctx: &mut Ctx<'_, A>,
    state: &mut WorkerState<'_>,
    group_key: &[u8],
    e: &Embedding,
) -> Result<(), EngineError> {
    ctx.begin_member(group_key);
    let alpha = catch_callback(state.step, g, e, "aggregation_filter", || {
        app.aggregation_filter(ctx, e)
    })?;
    if state.cfg.debug_checks {
        invariance_probe(g, app, ctx, state, e, Probe::Alpha(alpha))?;
        ctx.begin_member(group_key);
    }
    if !alpha {
        return Ok(());
    }
    state.alpha_passed += 1;
    if state.cfg.collect_embeddings {
        state.collected_alpha.push(e.clone());
    }
    catch_callback(state.step, g, e, "aggregation_process", || {
        app.aggregation_process(ctx, e)
    })?;

    for id in extend_candidates(g, e) {
        if !is_canonical_extension_any(g, e, id) {
            continue;
        }
        let extended = e.extended(id);
        candidate_flow(g, app, ctx, state, &extended)?;
    }
    Ok(())
}

/// φ, π, termination filter and frontier insertion for one candidate.
fn candidate_flow<A: Application>(
    g: &InputGraph,
    app: &A,
    ctx: &mut Ctx<'_, A>,
    state: &mut WorkerState<'_>,
    e: &Embedding,
) -> Result<(), EngineError> {
    let vertex_count = e.num_vertices(g);
    if vertex_count > state.cfg.max_pattern_size {
        return Err(EngineError::PatternSizeExceeded {
            step: state.step,
            size: vertex_count,
            max: state.cfg.max_pattern_size,
        });
    }
    ctx.begin_candidate();
    let keep = catch_callback(state.step, g, e, "filter", || app.filter(ctx, e))?;
    if state.cfg.debug_checks {
        invariance_probe(g, app, ctx, state, e, Probe::Filter(keep))?;
        ctx.begin_candidate();
    }
    if !keep {
        return Ok(());
    }
    state.processed += 1;
    if state.cfg.collect_embeddings {
        state.collected_processed.push(e.clone());
    }
    catch_callback(state.step, g, e, "process", || app.process(ctx, e))?;

    if catch_callback(state.step, g, e, "termination_filter", || {
        app.termination_filter(g, e)
    })? {
        let (quick, _) = ctx.quick_of(e);
        let entry = state
            .frontier_local
            .entry(quick.key())
            .or_insert_with(|| {
                let store = match state.cfg.storage {
                    Storage::Odag => LocalStore::Odag(OdagBuilder::new(state.mode, e.len())),
                    Storage::List => LocalStore::List(Vec::new()),
                };
                (quick, store)
            });
        entry.1.insert(e)?;
        if state.cfg.verify_roundtrip {
            state.kept.push(e.clone());
        }
    }
    Ok(())
}

enum Probe {
    Filter(bool),
    Alpha(bool),
}

/// Debug harness: re-evaluates φ or α on a randomly chosen automorphic
/// reordering of a sampled embedding and flags disagreements.
fn invariance_probe<A: Application>(
    g: &InputGraph,
    app: &A,
    ctx: &mut Ctx<'_, A>,
    state: &mut WorkerState<'_>,
    e: &Embedding,
    probe: Probe,
) -> Result<(), EngineError> {
    state.sample_tick += 1;
    if state.sample_tick % 64 != 0 || e.len() < 2 {
        return Ok(());
    }
    let reordered = random_visit_order(g, e, &mut state.rng);
    if reordered == *e {
        return Ok(());
    }
    ctx.begin_candidate();
    let (expected, got, name) = match probe {
        Probe::Filter(expected) => (
            expected,
            catch_callback(state.step, g, &reordered, "filter", || {
                app.filter(ctx, &reordered)
            })?,
            "filter",
        ),
        Probe::Alpha(expected) => (
            expected,
            catch_callback(state.step, g, &reordered, "aggregation_filter", || {
                app.aggregation_filter(ctx, &reordered)
            })?,
            "aggregation_filter",
        ),
    };
    if expected != got {
        return Err(EngineError::InvarianceViolation {
            step: state.step,
            callback: name,
            embedding: e.render(g),
        });
    }
    Ok(())
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Random connected visit order over the same id set as `e` (a valid
/// embedding of the same subgraph, usually a non-canonical one).
fn random_visit_order(g: &InputGraph, e: &Embedding, rng: &mut u64) -> Embedding {
    let ids: Vec<u32> = e.words().to_vec();
    let mut remaining = ids.clone();
    let start = remaining.remove((splitmix(rng) % remaining.len() as u64) as usize);
    let mut order = vec![start];
    while !remaining.is_empty() {
        let connected: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, &c)| {
                order.iter().any(|&w| match e.mode() {
                    ExplorationMode::VertexInduced => g.are_adjacent(w, c),
                    ExplorationMode::EdgeInduced => g.edges_share_endpoint(w, c),
                })
            })
            .map(|(i, _)| i)
            .collect();
        let pick = connected[(splitmix(rng) % connected.len() as u64) as usize];
        order.push(remaining.remove(pick));
    }
    Embedding::new(e.mode(), order)
}

fn catch_callback<T>(
    step: usize,
    g: &InputGraph,
    e: &Embedding,
    _name: &'static str,
    f: impl FnOnce() -> T,
) -> Result<T, EngineError> {
    catch_unwind(AssertUnwindSafe(f)).map_err(|payload| EngineError::CallbackPanic {
        step,
        embedding: e.render(g),
        message: panic_message(payload.as_ref()),
    })
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "<non-string panic payload>".to_string()
    }
}

/// Renders the run summary: per-step counts and totals.
pub fn render_summary<A: Application>(report: &RunReport<A>, header: &str) -> String {
    let mut s = String::new();
    s.push_str(header);
    if !header.is_empty() && !header.ends_with('\n') {
        s.push('\n');
    }
    for st in &report.steps {
        s.push_str(&format!(
            "step={} processed={} alpha_passed={} frontier={} quick={} canonical={} \
             canonize_calls={} decoded_rejected={} odag_bytes={} list_bytes={} elapsed_ms={}\n",
            st.step,
            st.processed,
            st.alpha_passed,
            st.frontier,
            st.quick_patterns,
            st.canonical_patterns,
            st.canonize_calls,
            st.decoded_rejected,
            st.frontier_odag_bytes,
            st.frontier_list_bytes,
            st.elapsed.as_millis()
        ));
    }
    let total_processed: u64 = report.steps.iter().map(|s| s.processed).sum();
    let total_calls: u64 = report.steps.iter().map(|s| s.canonize_calls).sum();
    s.push_str(&format!(
        "total processed={} output_lines={} canonize_calls={}\n",
        total_processed, report.output_lines_total, total_calls
    ));
    s
}
