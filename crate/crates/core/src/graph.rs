//! Undirected labeled graphs with chordality testing and small-scale
//! enumeration oracles.
//!
//! Adjacency rows are bit sets, so neighbourhood intersections (the inner
//! loop of the zero fill-in test) cost a few words per vertex.

use crate::junction_tree::JunctionTree;
use crate::vertex_set::VertexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is not chordal")]
    NotChordal,
    #[error("vertex count {p} exceeds the enumeration bound {max}")]
    TooLarge { p: usize, max: usize },
    #[error("malformed graph data: {0}")]
    Format(String),
}

/// Undirected graph on `p` vertices, no self loops.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    p: usize,
    rows: Vec<VertexSet>,
}

impl Graph {
    pub fn new(p: usize) -> Self {
        Graph {
            p,
            rows: (0..p).map(|_| VertexSet::empty(p)).collect(),
        }
    }

    pub fn with_edges(p: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(p);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Graph::new(p);
        for u in 0..p {
            for v in u + 1..p {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.p && v < self.p, "bad edge ({u},{v})");
        self.rows[u].insert(v);
        self.rows[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.rows[u].remove(v);
        self.rows[v].remove(u);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.rows[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.p {
            for v in self.rows[u].iter() {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True when every pair in `set` is connected.
    pub fn is_complete_set(&self, set: &VertexSet) -> bool {
        set.iter().all(|v| {
            let mut required = set.clone();
            required.remove(v);
            required.is_subset(&self.rows[v])
        })
    }

    /// Maximum cardinality search visit order. Ties broken by lowest index.
    fn mcs_order(&self) -> Vec<usize> {
        let p = self.p;
        let mut weight = vec![0usize; p];
        let mut visited = vec![false; p];
        let mut order = Vec::with_capacity(p);
        for _ in 0..p {
            let next = (0..p)
                .filter(|&v| !visited[v])
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("unvisited vertex");
            visited[next] = true;
            order.push(next);
            for u in self.rows[next].iter() {
                if !visited[u] {
                    weight[u] += 1;
                }
            }
        }
        order
    }

    /// Chordality via maximum cardinality search with the zero fill-in test.
    pub fn is_chordal(&self) -> bool {
        let order = self.mcs_order();
        let mut visit_rank = vec![0usize; self.p];
        for (i, &v) in order.iter().enumerate() {
            visit_rank[v] = i;
        }
        let mut seen = VertexSet::empty(self.p);
        for &v in &order {
            let prior = self.rows[v].intersection(&seen);
            if let Some(last) = prior.iter().max_by_key(|&u| visit_rank[u]) {
                let mut rest = prior;
                rest.remove(last);
                if !rest.is_subset(&self.rows[last]) {
                    return false;
                }
            }
            seen.insert(v);
        }
        true
    }

    /// Reduced junction tree on the maximal cliques, built from the MCS
    /// order. Clique `i > 0` attaches to the earliest previous clique
    /// containing its running intersection.
    pub fn mcs_clique_tree(&self) -> Result<JunctionTree, GraphError> {
        if !self.is_chordal() {
            return Err(GraphError::NotChordal);
        }
        let order = self.mcs_order();
        let mut seen = VertexSet::empty(self.p);
        let mut candidates: Vec<VertexSet> = Vec::new();
        for &v in &order {
            let mut c = self.rows[v].intersection(&seen);
            c.insert(v);
            seen.insert(v);
            candidates.push(c);
        }
        // Keep maximal candidates only, in discovery order.
        let mut cliques: Vec<VertexSet> = Vec::new();
        for c in candidates {
            if cliques.iter().any(|other| c.is_subset(other)) {
                continue;
            }
            cliques.retain(|other| !other.is_subset(&c));
            cliques.push(c);
        }
        let mut edges = Vec::with_capacity(cliques.len().saturating_sub(1));
        let mut union_prev = cliques[0].clone();
        for i in 1..cliques.len() {
            let sep = cliques[i].intersection(&union_prev);
            let parent = (0..i)
                .find(|&k| sep.is_subset(&cliques[k]))
                .expect("running intersection property");
            edges.push((parent, i));
            union_prev.union_with(&cliques[i]);
        }
        let t = JunctionTree::from_parts(self.p, cliques, &edges)
            .expect("clique tree is a tree");
        debug_assert!(t.is_junction_tree());
        Ok(t)
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(p={}, edges={:?})", self.p, self.edges())
    }
}

/// All labeled decomposable graphs on `p <= 6` vertices, in deterministic
/// (edge-mask) order. Test oracle; the candidate space is `2^(p(p-1)/2)`.
pub fn enumerate_decomposable_graphs(p: usize) -> Result<Vec<Graph>, GraphError> {
    const MAX: usize = 6;
    if p > MAX {
        return Err(GraphError::TooLarge { p, max: MAX });
    }
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|u| (u + 1..p).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let mut g = Graph::new(p);
        for (b, &(u, v)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.add_edge(u, v);
            }
        }
        if g.is_chordal() {
            out.push(g);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct EdgeListJson {
    p: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// JSON edge list `{"p": int, "edges": [[i,j], ..]}` with `i < j`,
    /// sorted lexicographically.
    pub fn to_edge_list_json(&self) -> String {
        serde_json::to_string(&EdgeListJson {
            p: self.p,
            edges: self.edges(),
        })
        .expect("graph serializes")
    }

    pub fn from_edge_list_json(s: &str) -> Result<Self, GraphError> {
        let data: EdgeListJson =
            serde_json::from_str(s).map_err(|e| GraphError::Format(e.to_string()))?;
        let mut g = Graph::new(data.p);
        for (u, v) in data.edges {
            if u >= data.p || v >= data.p || u == v {
                return Err(GraphError::Format(format!("bad edge ({u},{v})")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Header-free CSV adjacency matrix: `p` rows of `p` 0/1 entries.
    pub fn to_adjacency_csv(&self) -> String {
        let mut s = String::with_capacity(self.p * (2 * self.p + 1));
        for u in 0..self.p {
            for v in 0..self.p {
                if v > 0 {
                    s.push(',');
                }
                s.push(if u != v && self.has_edge(u, v) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_adjacency_csv(s: &str) -> Result<Self, GraphError> {
        let rows: Vec<&str> = s.lines().filter(|l| !l.trim().is_empty()).collect();
        let p = rows.len();
        let mut g = Graph::new(p);
        for (u, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split(',').map(str::trim).collect();
            if cells.len() != p {
                return Err(GraphError::Format(format!(
                    "row {u} has {} columns, expected {p}",
                    cells.len()
                )));
            }
            for (v, cell) in cells.iter().enumerate() {
                let bit = match *cell {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(GraphError::Format(format!("bad entry {other:?}")));
                    }
                };
                if bit {
                    if u == v {
                        return Err(GraphError::Format(format!("self loop at {u}")));
                    }
                    if u < v {
                        g.add_edge(u, v);
                    }
                }
            }
        }
        for u in 0..p {
            for v in u + 1..p {
                let upper = g.has_edge(u, v);
                let lower = rows[v]
                    .split(',')
                    .nth(u)
                    .map(|c| c.trim() == "1")
                    .unwrap_or(false);
                if upper != lower {
                    return Err(GraphError::Format(format!(
                        "asymmetric entries at ({u},{v})"
                    )));
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Naive chordality: every cycle of length >= 4 has a chord. Checked by
    /// searching for a chordless cycle through each vertex.
    fn is_chordal_naive(g: &Graph) -> bool {
        // A graph is chordal iff it has no induced cycle of length >= 4.
        // Enumerate all simple cycles up to length p via DFS on small graphs.
        fn extend(g: &Graph, path: &mut Vec<usize>, start: usize) -> bool {
            let last = *path.last().unwrap();
            for next in g.neighbors(last).iter() {
                if next == start && path.len() >= 4 {
                    // Cycle closed; chordless iff no non-consecutive pair adjacent.
                    let n = path.len();
                    let mut chord = false;
                    'outer: for i in 0..n {
                        for j in i + 2..n {
                            if i == 0 && j == n - 1 {
                                continue;
                            }
                            if g.has_edge(path[i], path[j]) {
                                chord = true;
                                break 'outer;
                            }
                        }
                    }
                    if !chord {
                        return true;
                    }
                }
                if next > start && !path.contains(&next) {
                    path.push(next);
                    if extend(g, path, start) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        for start in 0..g.p() {
            let mut path = vec![start];
            if extend(g, &mut path, start) {
                return false;
            }
        }
        true
    }

    #[test]
    fn empty_graph_is_chordal() {
        assert!(Graph::new(4).is_chordal());
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        let g = Graph::with_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(!g.is_chordal());
    }

    #[test]
    fn two_triangles_sharing_an_edge_are_chordal() {
        // Vertices 1..4 of the worked 4-vertex example, relabeled 0..3:
        // edges 01, 02, 12, 13, 23.
        let g = Graph::with_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        assert!(g.is_chordal());
        let t = g.mcs_clique_tree().unwrap();
        let mut cliques: Vec<Vec<usize>> =
            (0..t.node_count()).map(|i| t.clique(i).to_vec()).collect();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 1, 2], vec![1, 2, 3]]);
        assert_eq!(t.tree_edges().len(), 1);
        let (a, b) = t.tree_edges()[0];
        assert_eq!(t.separator(a, b).to_vec(), vec![1, 2]);
    }

    #[test]
    fn complete_graph_single_clique() {
        let t = Graph::complete(4).mcs_clique_tree().unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.clique(0).to_vec(), vec![0, 1, 2, 3]);
        assert!(t.tree_edges().is_empty());
    }

    #[test]
    fn band_graph_clique_path_has_running_intersection() {
        let edges: Vec<(usize, usize)> = (0..4).map(|i| (i, i + 1)).collect();
        let g = Graph::with_edges(5, &edges);
        let t = g.mcs_clique_tree().unwrap();
        assert_eq!(t.node_count(), 4);
        // Direct check of the running intersection property over every
        // discovery prefix: each clique's intersection with the union of
        // the previous ones sits inside a single earlier clique.
        let cliques: Vec<VertexSet> =
            (0..t.node_count()).map(|i| t.clique(i).clone()).collect();
        let mut union_prev = cliques[0].clone();
        for i in 1..cliques.len() {
            let sep = cliques[i].intersection(&union_prev);
            assert!((0..i).any(|k| sep.is_subset(&cliques[k])));
            union_prev.union_with(&cliques[i]);
        }
        assert_eq!(t.to_graph(), g);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_decomposable_graphs(2).unwrap().len(), 2);
        assert_eq!(enumerate_decomposable_graphs(3).unwrap().len(), 8);
        assert_eq!(enumerate_decomposable_graphs(4).unwrap().len(), 61);
        assert!(matches!(
            enumerate_decomposable_graphs(7),
            Err(GraphError::TooLarge { .. })
        ));
    }

    #[test]
    fn mcs_agrees_with_naive_checker_up_to_p5() {
        for p in 1..=5 {
            let pairs: Vec<(usize, usize)> = (0..p)
                .flat_map(|u| (u + 1..p).map(move |v| (u, v)))
                .collect();
            for mask in 0u64..1 << pairs.len() {
                let mut g = Graph::new(p);
                for (b, &(u, v)) in pairs.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        g.add_edge(u, v);
                    }
                }
                assert_eq!(g.is_chordal(), is_chordal_naive(&g), "p={p} mask={mask}");
            }
        }
    }

    #[test]
    fn clique_tree_round_trip_and_maximality() {
        for p in 1..=5 {
            for g in enumerate_decomposable_graphs(p).unwrap() {
                let t = g.mcs_clique_tree().unwrap();
                assert_eq!(t.to_graph(), g, "round trip failed for {g:?}");
                assert!(t.node_count() <= p);
                assert!(t.is_junction_tree());
                for i in 0..t.node_count() {
                    for j in 0..t.node_count() {
                        if i != j {
                            assert!(
                                !t.clique(i).is_subset(t.clique(j)),
                                "non-maximal clique in tree for {g:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn non_chordal_rejected_by_clique_tree() {
        let g = Graph::with_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(g.mcs_clique_tree(), Err(GraphError::NotChordal)));
    }

    #[test]
    fn serialization_round_trips() {
        let g = Graph::with_edges(5, &[(0, 3), (1, 2), (2, 4)]);
        assert_eq!(Graph::from_edge_list_json(&g.to_edge_list_json()).unwrap(), g);
        assert_eq!(Graph::from_adjacency_csv(&g.to_adjacency_csv()).unwrap(), g);
        assert!(g.to_edge_list_json().contains("\"edges\":[[0,3],[1,2],[2,4]]"));
    }
}
