//! The two Markov chains over junction trees: a reversible single-move
//! Metropolis-Hastings sampler and a non-reversible variant that evaluates
//! every eligible move for the chosen vertex in one step.
//!
//! All randomness is drawn from counter-keyed substreams of the master
//! seed: one stream per step for the step-level draws, one per
//! (step, candidate node) for the independent accept coins, and one per
//! step for skeleton resampling. Traces are therefore byte-identical
//! across runs and a chain can be resumed from any snapshot.

use crate::ggm::{GaussianEvidence, GgmError};
use crate::junction_tree::{JunctionTree, JunctionTreeError};
use crate::perturbation::{
    apply_move, boundary_set, neighbour_set, partition_sets, reverse_count_add_from,
    reverse_count_remove_from, Anchored, MoveKind, MoveProposal,
};
use crate::prior::CliqueSeparatorLaw;
use crate::tree_gen::{random_tree, resample_skeleton};
use crate::vertex_set::VertexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Evidence(#[from] GgmError),
    #[error(transparent)]
    State(#[from] JunctionTreeError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt trace: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    SingleMove,
    Parallel,
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub iterations: u64,
    pub sampler: SamplerKind,
    /// Resample the skeleton after every this many steps.
    pub skeleton_period: usize,
    pub prior: CliqueSeparatorLaw,
    pub seed: u64,
    /// Post-processing hint recorded with the trace; the chain itself
    /// never discards steps.
    pub burn_in: u64,
    /// Full-state snapshot period; defaults to `10 * skeleton_period`.
    pub snapshot_every: Option<usize>,
}

impl ChainConfig {
    pub fn new(iterations: u64, sampler: SamplerKind, seed: u64) -> Self {
        ChainConfig {
            iterations,
            sampler,
            skeleton_period: 100,
            prior: CliqueSeparatorLaw::Uniform,
            seed,
            burn_in: 0,
            snapshot_every: None,
        }
    }

    fn validate(&self) -> Result<(), ChainError> {
        if self.iterations == 0 {
            return Err(ChainError::Config("iterations must be positive".into()));
        }
        if self.skeleton_period == 0 {
            return Err(ChainError::Config("skeleton period must be >= 1".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(ChainError::Config("snapshot period must be >= 1".into()));
        }
        Ok(())
    }

    fn snapshot_period(&self) -> usize {
        self.snapshot_every
            .unwrap_or(10 * self.skeleton_period)
            .max(1)
    }
}

/// One proposal's outcome inside a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub target: u32,
    pub accepted: bool,
    /// Log acceptance ratio before the min with 0; absent when scoring
    /// failed numerically (such candidates are rejected and counted).
    pub log_alpha: Option<f64>,
    /// Other endpoints of the graph edges this move toggles.
    pub edges_changed: Vec<u32>,
}

/// One chain step: the vertex and move type drawn, every candidate's
/// outcome, and the post-step summary statistics. A step with no eligible
/// candidate records an empty candidate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub vertex: u32,
    pub kind: MoveKind,
    pub candidates: Vec<CandidateRecord>,
    pub log_score: f64,
    pub edge_count: u32,
    /// Number of maximal cliques of the represented graph.
    pub clique_count: u32,
}

/// Topology change from a skeleton resample after the given step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEvent {
    pub step: u64,
    pub tree_edges: Vec<(usize, usize)>,
}

/// Full chain state at a step boundary (after `step` steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub log_score: f64,
    pub tree: JunctionTree,
}

/// Ordered record of a chain run: enough to reconstruct every visited
/// graph (initial snapshot plus per-candidate edge diffs) and to resume
/// from any snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainTrace {
    pub p: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub burn_in: u64,
    pub records: Vec<StepRecord>,
    pub skeleton_events: Vec<SkeletonEvent>,
    pub snapshots: Vec<Snapshot>,
    pub numerical_rejections: u64,
    pub forced_rejections: u64,
}

/// Mutable chain state with incrementally maintained summaries.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub tree: JunctionTree,
    pub log_score: f64,
    pub edge_count: usize,
}

impl ChainState {
    pub fn new(
        tree: JunctionTree,
        ev: &GaussianEvidence,
        law: &CliqueSeparatorLaw,
    ) -> Result<Self, ChainError> {
        let log_score = ev.total_log_score(law, &tree)?;
        let edge_count = tree.graph_edge_count();
        Ok(ChainState {
            tree,
            log_score,
            edge_count,
        })
    }
}

/// Number of distinct maximal cliques among the tree's node cliques. A
/// clique value is non-maximal exactly when some node holding it has
/// a strictly larger neighbor.
fn maximal_clique_count(t: &JunctionTree) -> usize {
    let mut values: HashSet<&VertexSet> = HashSet::new();
    let mut dominated: HashSet<&VertexSet> = HashSet::new();
    for i in 0..t.node_count() {
        values.insert(t.clique(i));
        for &j in t.neighbors(i) {
            let (a, b) = (t.clique(i), t.clique(j));
            if a.is_subset(b) && a != b {
                dominated.insert(a);
            }
        }
    }
    values.len() - dominated.len()
}

/// Counter-keyed randomness for one step of one chain.
#[derive(Debug, Clone, Copy)]
pub struct StepRng {
    seed: u64,
    step: u64,
}

const ROLE_INIT: u64 = 0;
const ROLE_STEP: u64 = 1;
const ROLE_CANDIDATE: u64 = 2;
const ROLE_SKELETON: u64 = 3;

fn substream(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

fn stream_key(role: u64, step: u64, node: u64) -> u64 {
    debug_assert!(node < 1 << 16 && step < 1 << 44);
    role << 60 | step << 16 | node
}

impl StepRng {
    pub fn new(seed: u64, step: u64) -> Self {
        StepRng { seed, step }
    }

    /// Stream for the step-level draws (vertex, move type, target, coin).
    pub fn main(&self) -> ChaCha8Rng {
        substream(self.seed, stream_key(ROLE_STEP, self.step, 0))
    }

    /// Independent accept coin for a candidate, keyed by its node index
    /// so evaluation order is irrelevant.
    pub fn candidate_coin(&self, node: usize) -> f64 {
        substream(self.seed, stream_key(ROLE_CANDIDATE, self.step, node as u64)).gen()
    }

    pub fn skeleton(&self) -> ChaCha8Rng {
        substream(self.seed, stream_key(ROLE_SKELETON, self.step, 0))
    }

    pub fn init(seed: u64) -> ChaCha8Rng {
        substream(seed, stream_key(ROLE_INIT, 0, 0))
    }
}

fn draw_vertex_and_kind(rng: &mut ChaCha8Rng, p: usize) -> (usize, MoveKind) {
    let v = rng.gen_range(0..p);
    let kind = if rng.gen::<f64>() < 0.5 {
        MoveKind::Add
    } else {
        MoveKind::Remove
    };
    (v, kind)
}

struct Outcome {
    candidate: CandidateRecord,
    proposal: Option<MoveProposal>,
    numerical_failure: bool,
}

fn evaluate(
    ev: &GaussianEvidence,
    law: &CliqueSeparatorLaw,
    m: MoveProposal,
    extra_log: f64,
    coin: f64,
) -> Outcome {
    match ev.log_likelihood_ratio(&m) {
        Ok(llr) => {
            let log_alpha = llr + law.log_prior_ratio(&m) + extra_log;
            let accepted = coin.ln() < log_alpha;
            Outcome {
                candidate: CandidateRecord {
                    target: m.target as u32,
                    accepted,
                    log_alpha: Some(log_alpha),
                    edges_changed: m.edges_changed.iter().map(|&u| u as u32).collect(),
                },
                proposal: accepted.then_some(m),
                numerical_failure: false,
            }
        }
        Err(_) => Outcome {
            candidate: CandidateRecord {
                target: m.target as u32,
                accepted: false,
                log_alpha: None,
                edges_changed: m.edges_changed.iter().map(|&u| u as u32).collect(),
            },
            proposal: None,
            numerical_failure: true,
        },
    }
}

/// Counters shared by both step functions.
#[derive(Debug, Default, Clone, Copy)]
pub struct StepCounters {
    pub numerical_rejections: u64,
    pub forced_rejections: u64,
}

/// One reversible Metropolis-Hastings step. Draws a vertex and move type,
/// picks a target uniformly from the eligible set, and accepts with the
/// likelihood, prior, and proposal-count ratio; the reverse-set size comes
/// from the closed-form counts, never from materializing the update.
pub fn single_move_step(
    state: &mut ChainState,
    ev: &GaussianEvidence,
    law: &CliqueSeparatorLaw,
    rng: &StepRng,
    counters: &mut StepCounters,
) -> StepRecord {
    let mut main = rng.main();
    let p = state.tree.p();
    let (v, kind) = draw_vertex_and_kind(&mut main, p);
    let sets = partition_sets(&state.tree, v);
    let pool = match kind {
        MoveKind::Add => &sets.neighbours,
        MoveKind::Remove => &sets.boundary,
    };
    let mut candidates = Vec::new();
    if !pool.is_empty() {
        let target = pool[main.gen_range(0..pool.len())];
        let coin: f64 = main.gen();
        let m = MoveProposal::build(&state.tree, v, kind, target);
        let reverse = match kind {
            MoveKind::Add => reverse_count_add_from(&sets, &m),
            MoveKind::Remove => reverse_count_remove_from(&state.tree, &sets, &m),
        };
        if reverse == 0 {
            // Unreachable by the congruence relation, but an irreversible
            // proposal must never be accepted.
            candidates.push(CandidateRecord {
                target: m.target as u32,
                accepted: false,
                log_alpha: None,
                edges_changed: m.edges_changed.iter().map(|&u| u as u32).collect(),
            });
            counters.numerical_rejections += 1;
        } else {
            let extra = (pool.len() as f64).ln() - (reverse as f64).ln();
            let out = evaluate(ev, law, m, extra, coin);
            if out.numerical_failure {
                counters.numerical_rejections += 1;
            }
            if let Some(m) = out.proposal {
                let llr = ev.log_likelihood_ratio(&m).expect("scored above");
                apply_move(&mut state.tree, &m).expect("fresh proposal");
                state.log_score += llr + law.log_prior_ratio(&m);
                match kind {
                    MoveKind::Add => state.edge_count += m.edges_changed.len(),
                    MoveKind::Remove => state.edge_count -= m.edges_changed.len(),
                }
            }
            candidates.push(out.candidate);
        }
    }
    StepRecord {
        step: rng.step,
        vertex: v as u32,
        kind,
        candidates,
        log_score: state.log_score,
        edge_count: state.edge_count as u32,
        clique_count: maximal_clique_count(&state.tree) as u32,
    }
}

/// One non-reversible step. Every clique in the eligible set for the drawn
/// vertex and move type is evaluated against the pre-step state with its
/// own accept coin (no proposal-count factor), and all accepted updates
/// are applied together.
///
/// Accepted updates are applied in ascending node order. They never
/// interfere, with one exception: when the vertex lives in exactly two
/// cliques, both are removable, and accepting both would leave it
/// unhoused — the second application is then rejected and counted.
pub fn parallel_step(
    state: &mut ChainState,
    ev: &GaussianEvidence,
    law: &CliqueSeparatorLaw,
    rng: &StepRng,
    counters: &mut StepCounters,
) -> StepRecord {
    let mut main = rng.main();
    let p = state.tree.p();
    let (v, kind) = draw_vertex_and_kind(&mut main, p);
    let pool: Vec<Anchored> = match kind {
        MoveKind::Add => neighbour_set(&state.tree, v),
        MoveKind::Remove => boundary_set(&state.tree, v),
    };
    let mut candidates = Vec::with_capacity(pool.len());
    let mut accepted = Vec::new();
    for target in pool {
        let m = MoveProposal::build(&state.tree, v, kind, target);
        let coin = rng.candidate_coin(target.node);
        let out = evaluate(ev, law, m, 0.0, coin);
        if out.numerical_failure {
            counters.numerical_rejections += 1;
        }
        if let Some(m) = out.proposal {
            accepted.push((candidates.len(), m));
        }
        candidates.push(out.candidate);
    }
    for (slot, m) in accepted {
        match apply_move(&mut state.tree, &m) {
            Ok(()) => {
                let llr = ev.log_likelihood_ratio(&m).expect("scored above");
                state.log_score += llr + law.log_prior_ratio(&m);
                match kind {
                    MoveKind::Add => state.edge_count += m.edges_changed.len(),
                    MoveKind::Remove => state.edge_count -= m.edges_changed.len(),
                }
            }
            Err(_) => {
                candidates[slot].accepted = false;
                counters.forced_rejections += 1;
            }
        }
    }
    StepRecord {
        step: rng.step,
        vertex: v as u32,
        kind,
        candidates,
        log_score: state.log_score,
        edge_count: state.edge_count as u32,
        clique_count: maximal_clique_count(&state.tree) as u32,
    }
}

/// Runs a chain from step 0. The default initial state is the no-edge
/// junction tree on a random skeleton drawn from the seed.
pub fn run_chain(
    cfg: &ChainConfig,
    ev: &GaussianEvidence,
    initial: Option<JunctionTree>,
) -> Result<ChainTrace, ChainError> {
    cfg.validate()?;
    let tree = match initial {
        Some(t) => {
            t.validate()?;
            if t.p() != ev.p() {
                return Err(ChainError::Config(format!(
                    "initial tree has p={}, evidence has p={}",
                    t.p(),
                    ev.p()
                )));
            }
            t
        }
        None => {
            let skeleton = random_tree(ev.p(), &mut StepRng::init(cfg.seed));
            JunctionTree::no_edge(ev.p(), skeleton.edges())?
        }
    };
    let state = ChainState::new(tree, ev, &cfg.prior)?;
    run_from(cfg, ev, state, 0)
}

/// Resumes from a snapshot: replays steps `snapshot.step ..
/// cfg.iterations` with the same keyed substreams, so the concatenation
/// of a partial run and its resumption equals the uninterrupted run.
pub fn resume_chain(
    cfg: &ChainConfig,
    ev: &GaussianEvidence,
    snapshot: &Snapshot,
) -> Result<ChainTrace, ChainError> {
    cfg.validate()?;
    snapshot.tree.validate()?;
    if snapshot.step >= cfg.iterations {
        return Err(ChainError::Config(format!(
            "snapshot step {} is past the requested {} iterations",
            snapshot.step, cfg.iterations
        )));
    }
    let state = ChainState {
        tree: snapshot.tree.clone(),
        log_score: snapshot.log_score,
        edge_count: snapshot.tree.graph_edge_count(),
    };
    run_from(cfg, ev, state, snapshot.step)
}

fn run_from(
    cfg: &ChainConfig,
    ev: &GaussianEvidence,
    mut state: ChainState,
    start_step: u64,
) -> Result<ChainTrace, ChainError> {
    let mut trace = ChainTrace {
        p: ev.p(),
        seed: cfg.seed,
        sampler: cfg.sampler,
        burn_in: cfg.burn_in,
        records: Vec::with_capacity((cfg.iterations - start_step) as usize),
        skeleton_events: Vec::new(),
        snapshots: Vec::new(),
        numerical_rejections: 0,
        forced_rejections: 0,
    };
    trace.snapshots.push(Snapshot {
        step: start_step,
        log_score: state.log_score,
        tree: state.tree.clone(),
    });
    let mut counters = StepCounters::default();
    let snapshot_period = cfg.snapshot_period() as u64;
    for step in start_step..cfg.iterations {
        let rng = StepRng::new(cfg.seed, step);
        let record = match cfg.sampler {
            SamplerKind::SingleMove => single_move_step(&mut state, ev, &cfg.prior, &rng, &mut counters),
            SamplerKind::Parallel => parallel_step(&mut state, ev, &cfg.prior, &rng, &mut counters),
        };
        trace.records.push(record);
        let done = step + 1;
        if done % cfg.skeleton_period as u64 == 0 && done < cfg.iterations {
            resample_skeleton(&mut state.tree, &mut rng.skeleton());
            trace.skeleton_events.push(SkeletonEvent {
                step: done,
                tree_edges: state.tree.tree_edges(),
            });
        }
        if done % snapshot_period == 0 || done == cfg.iterations {
            // Re-anchor the incremental score so float drift cannot
            // accumulate over long runs; resumption sees the same value.
            state.log_score = ev.total_log_score(&cfg.prior, &state.tree)?;
            trace.snapshots.push(Snapshot {
                step: done,
                log_score: state.log_score,
                tree: state.tree.clone(),
            });
        }
    }
    trace.numerical_rejections = counters.numerical_rejections;
    trace.forced_rejections = counters.forced_rejections;
    Ok(trace)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    Header {
        p: usize,
        seed: u64,
        sampler: SamplerKind,
        burn_in: u64,
        numerical_rejections: u64,
        forced_rejections: u64,
    },
    Step(StepRecord),
    Skeleton(SkeletonEvent),
}

/// Writes a trace directory: `trace.ndjson` with one tagged JSON record
/// per line, plus one snapshot file per retained snapshot.
pub fn write_trace(dir: &Path, trace: &ChainTrace) -> Result<(), ChainError> {
    std::fs::create_dir_all(dir.join("snapshots"))?;
    let file = std::fs::File::create(dir.join("trace.ndjson"))?;
    let mut w = std::io::BufWriter::new(file);
    let header = TraceLine::Header {
        p: trace.p,
        seed: trace.seed,
        sampler: trace.sampler,
        burn_in: trace.burn_in,
        numerical_rejections: trace.numerical_rejections,
        forced_rejections: trace.forced_rejections,
    };
    serde_json::to_writer(&mut w, &header).map_err(to_io)?;
    w.write_all(b"\n")?;
    let mut events = trace.skeleton_events.iter().peekable();
    for record in &trace.records {
        serde_json::to_writer(&mut w, &TraceLine::Step(record.clone())).map_err(to_io)?;
        w.write_all(b"\n")?;
        while events.peek().is_some_and(|e| e.step == record.step + 1) {
            let e = events.next().unwrap();
            serde_json::to_writer(&mut w, &TraceLine::Skeleton(e.clone())).map_err(to_io)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    for snap in &trace.snapshots {
        let path = dir.join("snapshots").join(format!("step_{:09}.json", snap.step));
        std::fs::write(path, serde_json::to_string(snap).map_err(to_io)?)?;
    }
    Ok(())
}

fn to_io(e: serde_json::Error) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e)
}

pub fn read_trace(dir: &Path) -> Result<ChainTrace, ChainError> {
    let file = std::fs::File::open(dir.join("trace.ndjson"))?;
    let reader = std::io::BufReader::new(file);
    let mut trace: Option<ChainTrace> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine = serde_json::from_str(&line)
            .map_err(|e| ChainError::Corrupt(format!("line {}: {e}", lineno + 1)))?;
        match parsed {
            TraceLine::Header {
                p,
                seed,
                sampler,
                burn_in,
                numerical_rejections,
                forced_rejections,
            } => {
                trace = Some(ChainTrace {
                    p,
                    seed,
                    sampler,
                    burn_in,
                    records: Vec::new(),
                    skeleton_events: Vec::new(),
                    snapshots: Vec::new(),
                    numerical_rejections,
                    forced_rejections,
                });
            }
            TraceLine::Step(r) => trace
                .as_mut()
                .ok_or_else(|| ChainError::Corrupt("missing header line".into()))?
                .records
                .push(r),
            TraceLine::Skeleton(e) => trace
                .as_mut()
                .ok_or_else(|| ChainError::Corrupt("missing header line".into()))?
                .skeleton_events
                .push(e),
        }
    }
    let mut trace = trace.ok_or_else(|| ChainError::Corrupt("empty trace file".into()))?;
    let mut snaps = Vec::new();
    for entry in std::fs::read_dir(dir.join("snapshots"))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let snap: Snapshot = serde_json::from_str(&std::fs::read_to_string(&path)?)
                .map_err(|e| ChainError::Corrupt(format!("{}: {e}", path.display())))?;
            snap.tree
                .validate()
                .map_err(|e| ChainError::Corrupt(format!("{}: {e}", path.display())))?;
            snaps.push(snap);
        }
    }
    snaps.sort_by_key(|s| s.step);
    if snaps.is_empty() {
        return Err(ChainError::Corrupt("no snapshots found".into()));
    }
    trace.snapshots = snaps;
    Ok(trace)
}
