//! Expanded junction trees: labeled trees whose nodes carry vertex sets,
//! possibly empty or non-maximal.
//!
//! The junction property — nodes containing any given vertex form a
//! connected subtree — is the single structural invariant. Separators are
//! implicit: the separator of a tree edge is the intersection of its
//! endpoint cliques, and may be empty.

use crate::graph::Graph;
use crate::vertex_set::VertexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JunctionTreeError {
    #[error("edge set does not form a tree over the nodes")]
    NotATree,
    #[error("vertex {0} is not housed in any clique")]
    VertexUnhoused(usize),
    #[error("inconsistent junction tree: {0}")]
    Inconsistent(String),
}

/// Tree over cliques of a `p`-vertex graph. Node indices are stable
/// handles; cliques mutate in place during sampler moves.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "JunctionTreeData", into = "JunctionTreeData")]
pub struct JunctionTree {
    p: usize,
    cliques: Vec<VertexSet>,
    /// Sorted neighbor lists; `adj` encodes the tree edges both ways.
    adj: Vec<Vec<usize>>,
    /// For each graph vertex, the set of node indices housing it.
    vertex_nodes: Vec<VertexSet>,
}

/// Vertex-induced subtree: the nodes containing a given vertex, with each
/// node's degree counted within the induced set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubtree {
    pub root: usize,
    pub nodes: Vec<usize>,
    pub degrees: Vec<usize>,
}

impl JunctionTree {
    /// Builds a tree from explicit cliques and edges, validating tree-ness
    /// (connected, acyclic) but not the junction property.
    pub fn from_parts(
        p: usize,
        cliques: Vec<VertexSet>,
        edges: &[(usize, usize)],
    ) -> Result<Self, JunctionTreeError> {
        let n = cliques.len();
        if n == 0 || edges.len() != n - 1 {
            return Err(JunctionTreeError::NotATree);
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(JunctionTreeError::NotATree);
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(JunctionTreeError::NotATree);
            }
        }
        // n-1 distinct edges + connectivity => tree.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        if count != n {
            return Err(JunctionTreeError::NotATree);
        }
        let mut vertex_nodes = vec![VertexSet::empty(n); p];
        for (i, c) in cliques.iter().enumerate() {
            for v in c.iter() {
                if v >= p {
                    return Err(JunctionTreeError::Inconsistent(format!(
                        "clique member {v} out of range (p={p})"
                    )));
                }
                vertex_nodes[v].insert(i);
            }
        }
        Ok(JunctionTree {
            p,
            cliques,
            adj,
            vertex_nodes,
        })
    }

    /// Junction tree of the edgeless graph: node `i` of the skeleton
    /// carries clique `{i}`.
    pub fn no_edge(p: usize, skeleton_edges: &[(usize, usize)]) -> Result<Self, JunctionTreeError> {
        let cliques = (0..p).map(|i| VertexSet::singleton(p, i)).collect();
        Self::from_parts(p, cliques, skeleton_edges)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn node_count(&self) -> usize {
        self.cliques.len()
    }

    pub fn clique(&self, node: usize) -> &VertexSet {
        &self.cliques[node]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn separator(&self, a: usize, b: usize) -> VertexSet {
        self.cliques[a].intersection(&self.cliques[b])
    }

    /// Node indices housing `v`, as a bit set over nodes.
    pub fn vertex_nodes(&self, v: usize) -> &VertexSet {
        &self.vertex_nodes[v]
    }

    /// Tree edges as `(a, b)` with `a < b`, sorted.
    pub fn tree_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.node_count().saturating_sub(1));
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if j > i {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The unique decomposable graph represented by the tree: vertex pairs
    /// co-resident in any clique are connected.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.p);
        for c in &self.cliques {
            for v in c.iter() {
                for u in c.iter() {
                    if u > v {
                        g.add_edge(v, u);
                    }
                }
            }
        }
        g
    }

    /// Number of edges of `to_graph()` without materializing it.
    pub fn graph_edge_count(&self) -> usize {
        self.to_graph().edge_count()
    }

    pub(crate) fn add_vertex_to_clique(&mut self, node: usize, v: usize) {
        self.cliques[node].insert(v);
        self.vertex_nodes[v].insert(node);
    }

    pub(crate) fn remove_vertex_from_clique(&mut self, node: usize, v: usize) {
        self.cliques[node].remove(v);
        self.vertex_nodes[v].remove(node);
    }

    /// Replaces the tree topology, keeping cliques. Used by skeleton
    /// resampling; the caller guarantees the junction property.
    pub(crate) fn set_tree_edges(
        &mut self,
        edges: &[(usize, usize)],
    ) -> Result<(), JunctionTreeError> {
        let rebuilt = Self::from_parts(self.p, self.cliques.clone(), edges)?;
        self.adj = rebuilt.adj;
        Ok(())
    }

    /// True when every vertex's node set is connected in the tree
    /// (vacuously for unhoused vertices).
    pub fn is_junction_tree(&self) -> bool {
        (0..self.p).all(|v| self.subtree_is_connected(&self.vertex_nodes[v]))
    }

    fn subtree_is_connected(&self, nodes: &VertexSet) -> bool {
        let Some(start) = nodes.first() else {
            return true;
        };
        let mut seen = VertexSet::empty(self.node_count());
        seen.insert(start);
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.adj[i] {
                if nodes.contains(j) && !seen.contains(j) {
                    seen.insert(j);
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == nodes.len()
    }

    /// Full structural validation: tree-ness, index consistency, junction
    /// property, and every vertex housed.
    pub fn validate(&self) -> Result<(), JunctionTreeError> {
        let rebuilt = Self::from_parts(self.p, self.cliques.clone(), &self.tree_edges())?;
        for v in 0..self.p {
            if self.vertex_nodes[v] != rebuilt.vertex_nodes[v] {
                return Err(JunctionTreeError::Inconsistent(format!(
                    "stale vertex index for vertex {v}"
                )));
            }
            if self.vertex_nodes[v].is_empty() {
                return Err(JunctionTreeError::VertexUnhoused(v));
            }
            if !self.subtree_is_connected(&self.vertex_nodes[v]) {
                return Err(JunctionTreeError::Inconsistent(format!(
                    "junction property violated at vertex {v}"
                )));
            }
        }
        Ok(())
    }

    /// Induced subtree of the nodes housing `v`.
    pub fn induced_subtree(&self, v: usize) -> Result<InducedSubtree, JunctionTreeError> {
        let nodes_set = &self.vertex_nodes[v];
        if nodes_set.is_empty() {
            return Err(JunctionTreeError::VertexUnhoused(v));
        }
        let nodes = nodes_set.to_vec();
        let degrees = nodes
            .iter()
            .map(|&i| self.adj[i].iter().filter(|&&j| nodes_set.contains(j)).count())
            .collect();
        Ok(InducedSubtree {
            root: nodes[0],
            nodes,
            degrees,
        })
    }

    /// Compresses to the reduced junction tree: iteratively absorbs any
    /// clique that is a subset of an adjacent clique, rewiring its edges
    /// to the superset. The result's nodes are exactly the maximal
    /// cliques of `to_graph()`.
    pub fn press(&self) -> JunctionTree {
        let n = self.node_count();
        let mut cliques = self.cliques.clone();
        let mut adj: Vec<Vec<usize>> = self.adj.clone();
        let mut alive = vec![true; n];
        loop {
            let mut absorbed = None;
            'scan: for i in 0..n {
                if !alive[i] {
                    continue;
                }
                for &j in &adj[i] {
                    if cliques[i].is_subset(&cliques[j]) {
                        absorbed = Some((i, j));
                        break 'scan;
                    }
                }
            }
            let Some((i, j)) = absorbed else { break };
            let others: Vec<usize> = adj[i].iter().copied().filter(|&k| k != j).collect();
            for k in others {
                adj[k].retain(|&x| x != i);
                adj[k].push(j);
                adj[k].sort_unstable();
                adj[j].push(k);
            }
            adj[j].retain(|&x| x != i);
            adj[j].sort_unstable();
            adj[i].clear();
            cliques[i].clear();
            alive[i] = false;
        }
        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for i in 0..n {
            if alive[i] {
                remap[i] = kept.len();
                kept.push(std::mem::take(&mut cliques[i]));
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            if alive[i] {
                for &j in &adj[i] {
                    if j > i {
                        edges.push((remap[i], remap[j]));
                    }
                }
            }
        }
        JunctionTree::from_parts(self.p, kept, &edges).expect("press preserves tree-ness")
    }
}

/// Labeled equality: same cliques per node index and same edge set.
impl PartialEq for JunctionTree {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.cliques == other.cliques && self.adj == other.adj
    }
}

impl Eq for JunctionTree {}

impl std::fmt::Debug for JunctionTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "JunctionTree(p={}, cliques={:?}, edges={:?})",
            self.p,
            self.cliques,
            self.tree_edges()
        )
    }
}

/// Canonical serialized form: clique members sorted (by construction) and
/// tree edges sorted with the smaller index first.
#[derive(Serialize, Deserialize, Clone)]
pub struct JunctionTreeData {
    pub p: usize,
    pub cliques: Vec<Vec<usize>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl From<JunctionTree> for JunctionTreeData {
    fn from(t: JunctionTree) -> Self {
        JunctionTreeData {
            p: t.p,
            cliques: t.cliques.iter().map(VertexSet::to_vec).collect(),
            tree_edges: t.tree_edges(),
        }
    }
}

impl TryFrom<JunctionTreeData> for JunctionTree {
    type Error = JunctionTreeError;

    fn try_from(d: JunctionTreeData) -> Result<Self, Self::Error> {
        let cliques = d
            .cliques
            .iter()
            .map(|members| VertexSet::from_members(d.p, members))
            .collect();
        JunctionTree::from_parts(d.p, cliques, &d.tree_edges)
    }
}

/// Enumerates every tree over the given cliques that satisfies the
/// junction property, as sorted edge lists. Exhaustive over all
/// `n^(n-2)` labeled trees; test-scale only.
pub fn enumerate_junction_trees(cliques: &[VertexSet], p: usize) -> Vec<Vec<(usize, usize)>> {
    let n = cliques.len();
    assert!(n <= 9, "enumeration bound exceeded: {n} nodes");
    if n == 1 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut seq = vec![0usize; n.saturating_sub(2)];
    loop {
        let edges = crate::tree_gen::prufer_decode(n, &seq);
        if let Ok(t) = JunctionTree::from_parts(p, cliques.to_vec(), &edges) {
            if t.is_junction_tree() {
                out.push(t.tree_edges());
            }
        }
        // Advance the sequence like a base-n counter.
        let mut i = 0;
        loop {
            if i >= seq.len() {
                return out;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}
