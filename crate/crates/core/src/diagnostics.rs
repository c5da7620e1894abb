//! Post-processing of chain traces: serial expansion, graph-state
//! reconstruction, acceptance rates, autocorrelation, edge posteriors and
//! the MAP graph.

use crate::graph::Graph;
use crate::sampler::{ChainTrace, StepRecord};
use crate::perturbation::MoveKind;
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("corrupt trace: {0}")]
    CorruptTrace(String),
    #[error("series of length {len} is too short for max lag {max_lag}")]
    SeriesTooShort { len: usize, max_lag: usize },
    #[error("burn-in {burn_in} is not below the chain length {len}")]
    BurnInTooLarge { burn_in: usize, len: usize },
}

/// One proposal of the serial chain. A step with `k` candidates expands to
/// `k` consecutive records in candidate order; a step with none becomes a
/// single null record, so rates stay per-proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct SerialRecord {
    pub serial_index: usize,
    pub step: u64,
    pub vertex: u32,
    pub kind: MoveKind,
    pub target: Option<u32>,
    pub accepted: bool,
    pub edges_changed: u32,
    pub log_score: f64,
    pub null: bool,
}

impl SerialRecord {
    /// Accepted update that changed the represented graph's edge set.
    pub fn graph_update(&self) -> bool {
        self.accepted && self.edges_changed > 0
    }

    /// Accepted update of the junction tree, graph-changing or not.
    pub fn junction_update(&self) -> bool {
        self.accepted
    }
}

pub fn to_serial_chain(trace: &ChainTrace) -> Vec<SerialRecord> {
    let mut out = Vec::with_capacity(trace.records.len());
    for rec in &trace.records {
        if rec.candidates.is_empty() {
            out.push(SerialRecord {
                serial_index: out.len(),
                step: rec.step,
                vertex: rec.vertex,
                kind: rec.kind,
                target: None,
                accepted: false,
                edges_changed: 0,
                log_score: rec.log_score,
                null: true,
            });
            continue;
        }
        for c in &rec.candidates {
            out.push(SerialRecord {
                serial_index: out.len(),
                step: rec.step,
                vertex: rec.vertex,
                kind: rec.kind,
                target: Some(c.target),
                accepted: c.accepted,
                edges_changed: c.edges_changed.len() as u32,
                log_score: rec.log_score,
                null: false,
            });
        }
    }
    out
}

/// Per-step graph states, stored as the initial graph plus edge diffs.
#[derive(Debug, Clone)]
pub struct GraphChain {
    pub p: usize,
    pub initial: Graph,
    pub steps: Vec<GraphStep>,
}

#[derive(Debug, Clone)]
pub struct GraphStep {
    pub step: u64,
    pub changed: bool,
    pub added: Vec<(u32, u32)>,
    pub removed: Vec<(u32, u32)>,
}

impl GraphChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Edge count after every step.
    pub fn edge_counts(&self) -> Vec<usize> {
        let mut count = self.initial.edge_count();
        self.steps
            .iter()
            .map(|s| {
                count += s.added.len();
                count -= s.removed.len();
                count
            })
            .collect()
    }

    /// Walks the chain, handing each post-step graph to the visitor.
    pub fn visit<F: FnMut(usize, &Graph)>(&self, mut f: F) {
        let mut g = self.initial.clone();
        for (i, s) in self.steps.iter().enumerate() {
            for &(u, v) in &s.added {
                g.add_edge(u as usize, v as usize);
            }
            for &(u, v) in &s.removed {
                g.remove_edge(u as usize, v as usize);
            }
            f(i, &g);
        }
    }
}

/// Reconstructs the graph after every step from the trace's initial
/// snapshot and per-candidate edge diffs, flagging steps whose edge set
/// changed. Snapshots along the trace are used as integrity checks.
pub fn to_graph_chain(trace: &ChainTrace) -> Result<GraphChain, DiagnosticsError> {
    let first = trace
        .snapshots
        .first()
        .ok_or_else(|| DiagnosticsError::CorruptTrace("no snapshots".into()))?;
    if trace
        .records
        .first()
        .is_some_and(|r| r.step != first.step)
    {
        return Err(DiagnosticsError::CorruptTrace(format!(
            "first snapshot at step {} does not precede first record {}",
            first.step,
            trace.records[0].step
        )));
    }
    let mut g = first.tree.to_graph();
    let by_step: HashMap<u64, &crate::sampler::Snapshot> = trace
        .snapshots
        .iter()
        .map(|s| (s.step, s))
        .collect();
    let mut steps = Vec::with_capacity(trace.records.len());
    for rec in &trace.records {
        let mut added = Vec::new();
        let mut removed = Vec::new();
        for c in rec.candidates.iter().filter(|c| c.accepted) {
            for &u in &c.edges_changed {
                let (a, b) = (rec.vertex.min(u), rec.vertex.max(u));
                match rec.kind {
                    MoveKind::Add => {
                        if g.has_edge(a as usize, b as usize) {
                            return Err(DiagnosticsError::CorruptTrace(format!(
                                "step {}: edge ({a},{b}) added twice",
                                rec.step
                            )));
                        }
                        g.add_edge(a as usize, b as usize);
                        added.push((a, b));
                    }
                    MoveKind::Remove => {
                        if !g.has_edge(a as usize, b as usize) {
                            return Err(DiagnosticsError::CorruptTrace(format!(
                                "step {}: edge ({a},{b}) removed twice",
                                rec.step
                            )));
                        }
                        g.remove_edge(a as usize, b as usize);
                        removed.push((a, b));
                    }
                }
            }
        }
        if g.edge_count() != rec.edge_count as usize {
            return Err(DiagnosticsError::CorruptTrace(format!(
                "step {}: reconstructed {} edges, record says {}",
                rec.step,
                g.edge_count(),
                rec.edge_count
            )));
        }
        if let Some(snap) = by_step.get(&(rec.step + 1)) {
            if snap.tree.to_graph() != g {
                return Err(DiagnosticsError::CorruptTrace(format!(
                    "snapshot at step {} disagrees with reconstruction",
                    rec.step + 1
                )));
            }
        }
        steps.push(GraphStep {
            step: rec.step,
            changed: !added.is_empty() || !removed.is_empty(),
            added,
            removed,
        });
    }
    Ok(GraphChain {
        p: trace.p,
        initial: trace.snapshots[0].tree.to_graph(),
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptanceMode {
    GraphUpdates,
    JunctionUpdates,
}

/// Cumulative acceptance rates over the serial chain: entry `k` is the
/// accepted count among the first `k+1` records divided by `k+1`.
pub fn cumulative_acceptance(records: &[SerialRecord], mode: AcceptanceMode) -> Vec<f64> {
    let mut hits = 0usize;
    records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let hit = match mode {
                AcceptanceMode::GraphUpdates => r.graph_update(),
                AcceptanceMode::JunctionUpdates => r.junction_update(),
            };
            if hit {
                hits += 1;
            }
            hits as f64 / (k + 1) as f64
        })
        .collect()
}

/// Cumulative accepted-update counts per chain step (a parallel step can
/// contribute several).
pub fn cumulative_acceptance_steps(records: &[StepRecord], mode: AcceptanceMode) -> Vec<f64> {
    let mut hits = 0usize;
    records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            hits += r
                .candidates
                .iter()
                .filter(|c| match mode {
                    AcceptanceMode::GraphUpdates => c.accepted && !c.edges_changed.is_empty(),
                    AcceptanceMode::JunctionUpdates => c.accepted,
                })
                .count();
            hits as f64 / (k + 1) as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acf {
    /// Values at lags `0..=max_lag`; lag 0 is 1.
    pub values: Vec<f64>,
    /// Set when the series is constant; values beyond lag 0 are then 0.
    pub degenerate: bool,
}

/// Standard sample autocorrelation.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Acf, DiagnosticsError> {
    if x.len() <= max_lag {
        return Err(DiagnosticsError::SeriesTooShort {
            len: x.len(),
            max_lag,
        });
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        let mut values = vec![0.0; max_lag + 1];
        values[0] = 1.0;
        return Ok(Acf {
            values,
            degenerate: true,
        });
    }
    let values = (0..=max_lag)
        .map(|lag| {
            let cov: f64 = (0..n - lag)
                .map(|t| (x[t] - mean) * (x[t + lag] - mean))
                .sum();
            cov / var
        })
        .collect();
    Ok(Acf {
        values,
        degenerate: false,
    })
}

/// Fraction of post-burn-in states containing each edge; symmetric with a
/// zero diagonal.
pub fn edge_posterior_matrix(
    chain: &GraphChain,
    burn_in: usize,
) -> Result<DMatrix<f64>, DiagnosticsError> {
    if burn_in >= chain.len() {
        return Err(DiagnosticsError::BurnInTooLarge {
            burn_in,
            len: chain.len(),
        });
    }
    let p = chain.p;
    let total = chain.len() - burn_in;
    // Timestamp trick: edges change rarely, so account presence in spans.
    let mut since: HashMap<(u32, u32), usize> = HashMap::new();
    let mut counts: DMatrix<f64> = DMatrix::zeros(p, p);
    let mut g = chain.initial.clone();
    for step_idx in 0..chain.len() {
        let s = &chain.steps[step_idx];
        for &(u, v) in &s.added {
            g.add_edge(u as usize, v as usize);
            if step_idx >= burn_in {
                since.insert((u, v), step_idx);
            }
        }
        for &(u, v) in &s.removed {
            g.remove_edge(u as usize, v as usize);
            if step_idx >= burn_in {
                let from = since.remove(&(u, v)).unwrap_or(burn_in);
                counts[(u as usize, v as usize)] += (step_idx - from) as f64;
            }
        }
        if step_idx + 1 == burn_in {
            // States before burn-in contribute nothing; re-anchor spans.
            since.clear();
        }
    }
    for (u, v) in g.edges() {
        let from = since.get(&(u as u32, v as u32)).copied().unwrap_or(burn_in);
        counts[(u, v)] += (chain.len() - from) as f64;
    }
    let mut out = DMatrix::zeros(p, p);
    for u in 0..p {
        for v in u + 1..p {
            let frac = counts[(u, v)] / total as f64;
            out[(u, v)] = frac;
            out[(v, u)] = frac;
        }
    }
    Ok(out)
}

/// Most frequently visited post-burn-in graph; ties broken by first
/// occurrence. States are keyed by a digest of the canonical edge list.
pub fn map_graph(chain: &GraphChain, burn_in: usize) -> Result<Graph, DiagnosticsError> {
    if burn_in >= chain.len() {
        return Err(DiagnosticsError::BurnInTooLarge {
            burn_in,
            len: chain.len(),
        });
    }
    struct Entry {
        count: usize,
        first_seen: usize,
        edges: Vec<(usize, usize)>,
    }
    let mut table: HashMap<[u8; 32], Entry> = HashMap::new();
    chain.visit(|i, g| {
        if i < burn_in {
            return;
        }
        let mut hasher = Sha256::new();
        for (u, v) in g.edges() {
            hasher.update((u as u64).to_le_bytes());
            hasher.update((v as u64).to_le_bytes());
        }
        let digest: [u8; 32] = hasher.finalize().into();
        table
            .entry(digest)
            .and_modify(|e| e.count += 1)
            .or_insert_with(|| Entry {
                count: 1,
                first_seen: i,
                edges: g.edges(),
            });
    });
    let best = table
        .values()
        .max_by(|a, b| a.count.cmp(&b.count).then(b.first_seen.cmp(&a.first_seen)))
        .expect("at least one state");
    Ok(Graph::with_edges(chain.p, &best.edges))
}

/// Probability that a uniformly drawn true edge outranks a uniformly drawn
/// non-edge under the posterior scores, with ties counted half.
pub fn edge_auc(posterior: &DMatrix<f64>, truth: &Graph) -> f64 {
    let p = truth.p();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for u in 0..p {
        for v in u + 1..p {
            if truth.has_edge(u, v) {
                pos.push(posterior[(u, v)]);
            } else {
                neg.push(posterior[(u, v)]);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return 1.0;
    }
    let mut wins = 0.0f64;
    for &a in &pos {
        for &b in &neg {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Number of vertex pairs whose edge status differs.
pub fn hamming_distance(a: &Graph, b: &Graph) -> usize {
    assert_eq!(a.p(), b.p());
    let mut d = 0;
    for u in 0..a.p() {
        for v in u + 1..a.p() {
            if a.has_edge(u, v) != b.has_edge(u, v) {
                d += 1;
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ggm::GaussianEvidence;
    use crate::sampler::{run_chain, ChainConfig, SamplerKind};

    fn small_trace(sampler: SamplerKind, seed: u64, iters: u64) -> ChainTrace {
        let ev = GaussianEvidence::prior_only(5);
        let mut cfg = ChainConfig::new(iters, sampler, seed);
        cfg.skeleton_period = 20;
        cfg.snapshot_every = Some(50);
        run_chain(&cfg, &ev, None).unwrap()
    }

    #[test]
    fn serial_expansion_counts() {
        let trace = small_trace(SamplerKind::Parallel, 3, 300);
        let serial = to_serial_chain(&trace);
        let expected: usize = trace
            .records
            .iter()
            .map(|r| r.candidates.len().max(1))
            .sum();
        assert_eq!(serial.len(), expected);
        let nulls = trace
            .records
            .iter()
            .filter(|r| r.candidates.is_empty())
            .count();
        assert_eq!(serial.iter().filter(|r| r.null).count(), nulls);
        assert!(serial.iter().all(|r| !r.null || !r.accepted));
        // Candidate order within a step is ascending target node.
        for w in serial.windows(2) {
            if w[0].step == w[1].step {
                assert!(w[0].target.unwrap() < w[1].target.unwrap());
            }
        }
    }

    #[test]
    fn graph_chain_matches_replayed_states() {
        for sampler in [SamplerKind::SingleMove, SamplerKind::Parallel] {
            let trace = small_trace(sampler, 5, 300);
            let chain = to_graph_chain(&trace).unwrap();
            // Replay oracle: rebuild each post-step graph from the
            // snapshots and compare at snapshot boundaries.
            let counts = chain.edge_counts();
            for snap in trace.snapshots.iter().skip(1) {
                let idx = (snap.step - trace.records[0].step) as usize - 1;
                assert_eq!(counts[idx], snap.tree.to_graph().edge_count());
            }
            let mut visited = 0;
            chain.visit(|i, g| {
                visited += 1;
                assert_eq!(g.edge_count(), counts[i]);
            });
            assert_eq!(visited, chain.len());
            // Junction-only moves leave the graph-change flag unset.
            for (rec, gs) in trace.records.iter().zip(&chain.steps) {
                let toggled: usize = rec
                    .candidates
                    .iter()
                    .filter(|c| c.accepted)
                    .map(|c| c.edges_changed.len())
                    .sum();
                assert_eq!(gs.changed, toggled > 0);
            }
        }
    }

    #[test]
    fn corrupt_trace_detected() {
        let mut trace = small_trace(SamplerKind::SingleMove, 7, 100);
        // Tamper with a recorded edge count.
        let idx = trace.records.len() / 2;
        trace.records[idx].edge_count += 1;
        assert!(matches!(
            to_graph_chain(&trace),
            Err(DiagnosticsError::CorruptTrace(_))
        ));
    }

    #[test]
    fn acceptance_rates() {
        let recs: Vec<SerialRecord> = (0..4)
            .map(|i| SerialRecord {
                serial_index: i,
                step: i as u64,
                vertex: 0,
                kind: MoveKind::Add,
                target: Some(1),
                accepted: i % 2 == 0,
                edges_changed: if i == 0 { 1 } else { 0 },
                log_score: 0.0,
                null: false,
            })
            .collect();
        let graph = cumulative_acceptance(&recs, AcceptanceMode::GraphUpdates);
        assert_eq!(graph, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        let junction = cumulative_acceptance(&recs, AcceptanceMode::JunctionUpdates);
        assert_eq!(junction, vec![1.0, 0.5, 2.0 / 3.0, 0.5]);
        let all_rejected: Vec<SerialRecord> = recs
            .iter()
            .map(|r| SerialRecord {
                accepted: false,
                ..r.clone()
            })
            .collect();
        assert!(cumulative_acceptance(&all_rejected, AcceptanceMode::GraphUpdates)
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn acf_basics() {
        let constant = vec![2.5; 100];
        let acf = autocorrelation(&constant, 10).unwrap();
        assert!(acf.degenerate);
        assert_eq!(acf.values[0], 1.0);
        assert!(acf.values[1..].iter().all(|&v| v == 0.0));

        let alternating: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let acf = autocorrelation(&alternating, 2).unwrap();
        assert!((acf.values[1] + 1.0).abs() < 5e-3);
        assert!((acf.values[2] - 1.0).abs() < 5e-3);

        assert!(matches!(
            autocorrelation(&[1.0, 2.0], 5),
            Err(DiagnosticsError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn edge_posterior_and_map_on_synthetic_chain() {
        // Two alternating states differing in one edge.
        let g0 = Graph::with_edges(3, &[(0, 1)]);
        let steps: Vec<GraphStep> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    GraphStep {
                        step: i as u64,
                        changed: true,
                        added: vec![(1, 2)],
                        removed: vec![],
                    }
                } else {
                    GraphStep {
                        step: i as u64,
                        changed: true,
                        added: vec![],
                        removed: vec![(1, 2)],
                    }
                }
            })
            .collect();
        let chain = GraphChain {
            p: 3,
            initial: g0,
            steps,
        };
        let post = edge_posterior_matrix(&chain, 0).unwrap();
        assert_eq!(post[(0, 1)], 1.0);
        assert_eq!(post[(1, 0)], 1.0);
        assert_eq!(post[(1, 2)], 0.5);
        assert_eq!(post[(0, 2)], 0.0);
        assert_eq!(post[(0, 0)], 0.0);
        // Tie between the two states: the earlier-visited one wins.
        let map = map_graph(&chain, 0).unwrap();
        assert_eq!(map.edges(), vec![(0, 1), (1, 2)]);
        assert!(matches!(
            map_graph(&chain, 10),
            Err(DiagnosticsError::BurnInTooLarge { .. })
        ));
    }

    #[test]
    fn edge_posterior_matches_direct_average() {
        let trace = small_trace(SamplerKind::Parallel, 9, 400);
        let chain = to_graph_chain(&trace).unwrap();
        let burn = 100;
        let post = edge_posterior_matrix(&chain, burn).unwrap();
        let p = chain.p;
        let mut direct = DMatrix::zeros(p, p);
        chain.visit(|i, g| {
            if i >= burn {
                for (u, v) in g.edges() {
                    direct[(u, v)] += 1.0;
                    direct[(v, u)] += 1.0;
                }
            }
        });
        direct /= (chain.len() - burn) as f64;
        assert!((post - direct).amax() < 1e-12);
    }

    #[test]
    fn auc_and_hamming() {
        let truth = Graph::with_edges(3, &[(0, 1)]);
        let mut post = DMatrix::zeros(3, 3);
        post[(0, 1)] = 0.9;
        post[(1, 0)] = 0.9;
        post[(1, 2)] = 0.2;
        post[(2, 1)] = 0.2;
        assert_eq!(edge_auc(&post, &truth), 1.0);
        let other = Graph::with_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(hamming_distance(&truth, &other), 1);
    }
}
