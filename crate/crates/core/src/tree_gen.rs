//! Random tree skeletons, junction trees grown from attempt-once random
//! walks, skeleton resampling, and the banded-graph simulator.

use crate::graph::Graph;
use crate::junction_tree::JunctionTree;
use crate::vertex_set::VertexSet;
use rand::Rng;
use std::collections::BTreeMap;

/// Labeled tree on `n` nodes, stored as an undirected edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Tree {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        assert_eq!(edges.len(), n.saturating_sub(1));
        Tree { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Decodes a Prüfer sequence of length `n-2` into the edge list of a
/// labeled tree on `n` nodes.
pub(crate) fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    if n <= 1 {
        return vec![];
    }
    assert_eq!(seq.len(), n - 2);
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    // Min-index leaf first, tracked with a moving pointer.
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &s in seq {
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 && s < ptr {
            leaf = s;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    let last = (leaf..n).rev().find(|&i| degree[i] == 1 && i != leaf);
    edges.push((leaf, last.expect("two leaves remain")));
    edges
}

/// Uniform labeled tree on `n` nodes via a random Prüfer sequence; there
/// are `n^(n-2)` of them.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Tree {
    assert!(n >= 1);
    if n == 1 {
        return Tree::new(1, vec![]);
    }
    if n == 2 {
        return Tree::new(2, vec![(0, 1)]);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    Tree::new(n, prufer_decode(n, &seq))
}

/// Grows a junction tree on skeleton `t` from `n` independent attempt-once
/// random walks. Walk `i` starts at a uniform node and repeatedly draws an
/// unattempted frontier neighbor of its visited set, keeping it with
/// probability 1/2; the nodes it visited end up housing vertex `i`.
///
/// The output always satisfies the junction property: each walk's visited
/// set is connected in `t` by construction.
pub fn attempt_once_walk(t: &Tree, rng: &mut impl Rng) -> JunctionTree {
    let n = t.n();
    let adj = t.adjacency();
    let mut cliques = vec![VertexSet::empty(n); n];
    for walk in 0..n {
        let start = rng.gen_range(0..n);
        let mut visited = VertexSet::singleton(n, start);
        let mut attempted = VertexSet::empty(n);
        let mut frontier = VertexSet::empty(n);
        for &j in &adj[start] {
            frontier.insert(j);
        }
        while let Some(k) = {
            let open = frontier.difference(&visited).difference(&attempted);
            let m = open.len();
            if m == 0 {
                None
            } else {
                open.iter().nth(rng.gen_range(0..m))
            }
        } {
            if rng.gen::<f64>() >= 0.5 {
                visited.insert(k);
                for &j in &adj[k] {
                    frontier.insert(j);
                }
            } else {
                attempted.insert(k);
            }
        }
        for node in visited.iter() {
            cliques[node].insert(walk);
        }
    }
    let t = JunctionTree::from_parts(n, cliques, t.edges()).expect("skeleton is a tree");
    debug_assert!(t.is_junction_tree());
    t
}

/// Redraws the tree topology uniformly among all trees that satisfy the
/// junction property for the same cliques; the represented graph is
/// unchanged.
///
/// Edges are grouped by separator value. Removing one group's edges splits
/// the tree into components, and the valid rewirings of that group connect
/// the components through nodes containing the separator. A weighted
/// Prüfer draw over those attachment nodes picks uniformly among
/// (component tree, attachment choice) pairs, and the groups are
/// independent of each other.
pub fn resample_skeleton(t: &mut JunctionTree, rng: &mut impl Rng) {
    let n = t.node_count();
    if n <= 2 {
        return;
    }
    let mut classes: BTreeMap<VertexSet, Vec<(usize, usize)>> = BTreeMap::new();
    for (a, b) in t.tree_edges() {
        classes.entry(t.separator(a, b)).or_default().push((a, b));
    }
    let mut new_edges: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    for (sep, class_edges) in &classes {
        // Components of the tree once this class's edges are removed.
        let removed: std::collections::HashSet<(usize, usize)> =
            class_edges.iter().copied().collect();
        let mut comp = vec![usize::MAX; n];
        let mut q = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = q;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for &j in t.neighbors(i) {
                    let key = (i.min(j), i.max(j));
                    if !removed.contains(&key) && comp[j] == usize::MAX {
                        comp[j] = q;
                        stack.push(j);
                    }
                }
            }
            q += 1;
        }
        debug_assert_eq!(q, class_edges.len() + 1);
        // Attachment nodes per component: those containing the separator.
        let mut attachments = vec![Vec::new(); q];
        for i in 0..n {
            if sep.is_subset(t.clique(i)) {
                attachments[comp[i]].push(i);
            }
        }
        new_edges.extend(rewire_class(&attachments, rng));
    }
    t.set_tree_edges(&new_edges)
        .expect("per-class rewiring keeps a spanning tree");
    debug_assert!(t.is_junction_tree());
}

/// Uniform draw over trees connecting `q` components, with each edge
/// endpoint choosing an attachment node inside its component. A sequence
/// of `q-2` attachment nodes drawn uniformly over all attachments plays
/// the role of a Prüfer sequence on components; leaf-side endpoints are
/// drawn fresh.
fn rewire_class(attachments: &[Vec<usize>], rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let q = attachments.len();
    let pick = |rng: &mut dyn rand::RngCore, comp: usize| {
        attachments[comp][rng.gen_range(0..attachments[comp].len())]
    };
    if q == 2 {
        return vec![(pick(rng, 0), pick(rng, 1))];
    }
    let all: Vec<usize> = (0..q)
        .flat_map(|c| attachments[c].iter().copied().map(move |node| node))
        .collect();
    let comp_of = {
        let mut map = vec![0usize; all.iter().max().unwrap() + 1];
        for (c, nodes) in attachments.iter().enumerate() {
            for &node in nodes {
                map[node] = c;
            }
        }
        map
    };
    let symbols: Vec<usize> = (0..q - 2).map(|_| all[rng.gen_range(0..all.len())]).collect();
    let mut degree = vec![1usize; q];
    for &s in &symbols {
        degree[comp_of[s]] += 1;
    }
    let mut edges = Vec::with_capacity(q - 1);
    let mut done = vec![false; q];
    for &s in &symbols {
        let leaf = (0..q).find(|&c| degree[c] == 1 && !done[c]).expect("leaf");
        edges.push((pick(rng, leaf), s));
        done[leaf] = true;
        degree[comp_of[s]] -= 1;
    }
    let rest: Vec<usize> = (0..q).filter(|&c| !done[c]).collect();
    debug_assert_eq!(rest.len(), 2);
    edges.push((pick(rng, rest[0]), pick(rng, rest[1])));
    edges
}

/// Random banded decomposable graph: vertex `i` connects to its `l_i`
/// immediate predecessors with `l_i` uniform on `[1, max_lag]`, clamped to
/// `min(l_i, l_{i-1}+1, i)` so each predecessor block is complete.
pub fn random_ar_graph(p: usize, max_lag: usize, rng: &mut impl Rng) -> Graph {
    assert!(p >= 1 && max_lag >= 1);
    let mut g = Graph::new(p);
    let mut prev_lag = 0usize;
    for i in 0..p {
        let lag = rng.gen_range(1..=max_lag).min(prev_lag + 1).min(i);
        for back in 1..=lag {
            g.add_edge(i, i - back);
        }
        prev_lag = lag;
    }
    assert!(g.is_chordal(), "banded construction must stay chordal");
    g
}
