//! Single-vertex junction tree moves and their bookkeeping.
//!
//! For a tree `T` and vertex `v`, the cliques split three ways: the
//! neighbour set (cliques adjacent to the subtree housing `v`, where `v`
//! can be added), the boundary set (leaf cliques of that subtree, where
//! `v` can be removed), and everything else. Adding or removing `v`
//! changes the represented graph by exactly the edges from `v` to the
//! target clique's members outside the anchor, and the updated clique
//! swaps sets, which yields closed-form reverse-proposal counts.
//!
//! The module also carries executable forms of the connect/disconnect
//! decomposability conditions for multi-vertex updates, implemented as
//! test-scale searches over reduced junction trees.

use crate::graph::Graph;
use crate::junction_tree::{enumerate_junction_trees, JunctionTree};
use crate::vertex_set::VertexSet;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error("proposal is stale against the current tree")]
    StaleProposal,
    #[error("vertex count {p} exceeds the search bound {max}")]
    TooLarge { p: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Add,
    Remove,
}

/// A clique eligible for an update, with the unique clique of the
/// vertex-induced subtree it is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchored {
    pub node: usize,
    pub anchor: usize,
}

/// Eligible-move sets for one vertex, each sorted by node index.
#[derive(Debug, Clone)]
pub struct PartitionSets {
    pub v: usize,
    /// Number of nodes housing `v`.
    pub subtree_size: usize,
    /// Cliques outside the subtree, adjacent to it: targets for `Add`.
    pub neighbours: Vec<Anchored>,
    /// Leaf cliques of the subtree (degree 1 within it): targets for
    /// `Remove`. Empty when the subtree is a single node, so a vertex is
    /// never removed from its last clique.
    pub boundary: Vec<Anchored>,
}

/// Cliques adjacent to the subtree housing `v`, sorted by node index.
pub fn neighbour_set(t: &JunctionTree, v: usize) -> Vec<Anchored> {
    let subtree = t.vertex_nodes(v);
    let mut out = Vec::new();
    for anchor in subtree.iter() {
        for &node in t.neighbors(anchor) {
            if !subtree.contains(node) {
                out.push(Anchored { node, anchor });
            }
        }
    }
    out.sort_unstable_by_key(|a| a.node);
    out
}

/// Leaf cliques of the subtree housing `v`, sorted by node index.
pub fn boundary_set(t: &JunctionTree, v: usize) -> Vec<Anchored> {
    let subtree = t.vertex_nodes(v);
    if subtree.len() <= 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for node in subtree.iter() {
        let mut inside = t.neighbors(node).iter().filter(|&&j| subtree.contains(j));
        if let (Some(&anchor), None) = (inside.next(), inside.next()) {
            out.push(Anchored { node, anchor });
        }
    }
    out
}

pub fn partition_sets(t: &JunctionTree, v: usize) -> PartitionSets {
    PartitionSets {
        v,
        subtree_size: t.vertex_nodes(v).len(),
        neighbours: neighbour_set(t, v),
        boundary: boundary_set(t, v),
    }
}

/// A fully materialized single-vertex move: target clique before/after and
/// the separators against the anchor, plus the graph edges it toggles.
#[derive(Debug, Clone)]
pub struct MoveProposal {
    pub v: usize,
    pub kind: MoveKind,
    pub target: usize,
    pub anchor: usize,
    pub clique_before: VertexSet,
    pub clique_after: VertexSet,
    pub sep_before: VertexSet,
    pub sep_after: VertexSet,
    /// Endpoints `u` of the graph edges `(v, u)` connected (Add) or
    /// disconnected (Remove): the target's members outside the anchor.
    pub edges_changed: Vec<usize>,
}

impl MoveProposal {
    pub fn build(t: &JunctionTree, v: usize, kind: MoveKind, target: Anchored) -> Self {
        let clique_before = t.clique(target.node).clone();
        let anchor_clique = t.clique(target.anchor);
        let mut clique_after = clique_before.clone();
        match kind {
            MoveKind::Add => clique_after.insert(v),
            MoveKind::Remove => clique_after.remove(v),
        }
        let sep_before = clique_before.intersection(anchor_clique);
        let sep_after = clique_after.intersection(anchor_clique);
        let edges_changed = clique_before.difference(anchor_clique).to_vec();
        MoveProposal {
            v,
            kind,
            target: target.node,
            anchor: target.anchor,
            clique_before,
            clique_after,
            sep_before,
            sep_after,
            edges_changed,
        }
    }

    /// The move undoing this one on the updated tree.
    pub fn inverse(&self) -> MoveProposal {
        MoveProposal {
            v: self.v,
            kind: match self.kind {
                MoveKind::Add => MoveKind::Remove,
                MoveKind::Remove => MoveKind::Add,
            },
            target: self.target,
            anchor: self.anchor,
            clique_before: self.clique_after.clone(),
            clique_after: self.clique_before.clone(),
            sep_before: self.sep_after.clone(),
            sep_after: self.sep_before.clone(),
            edges_changed: self.edges_changed.clone(),
        }
    }
}

/// Re-checks the proposal against the current tree and applies it in
/// place. The junction property is preserved by construction.
pub fn apply_move(t: &mut JunctionTree, m: &MoveProposal) -> Result<(), PerturbationError> {
    let subtree = t.vertex_nodes(m.v);
    let valid = match m.kind {
        MoveKind::Add => {
            !subtree.contains(m.target)
                && subtree.contains(m.anchor)
                && t.neighbors(m.target).contains(&m.anchor)
                && *t.clique(m.target) == m.clique_before
        }
        MoveKind::Remove => {
            subtree.contains(m.target)
                && subtree.len() > 1
                && t.neighbors(m.target)
                    .iter()
                    .filter(|&&j| subtree.contains(j))
                    .eq(std::iter::once(&m.anchor))
                && *t.clique(m.target) == m.clique_before
        }
    };
    if !valid {
        return Err(PerturbationError::StaleProposal);
    }
    match m.kind {
        MoveKind::Add => t.add_vertex_to_clique(m.target, m.v),
        MoveKind::Remove => t.remove_vertex_from_clique(m.target, m.v),
    }
    Ok(())
}

/// Size of the boundary set after an `Add`, without materializing the
/// updated tree. The updated clique becomes a leaf of the grown subtree;
/// the anchor loses leaf status if it was a leaf, and gains it if the
/// subtree was a single node.
pub(crate) fn reverse_count_add_from(sets: &PartitionSets, m: &MoveProposal) -> usize {
    debug_assert!(matches!(m.kind, MoveKind::Add));
    let anchor_is_leaf = sets.boundary.iter().any(|a| a.node == m.anchor);
    sets.boundary.len() + 1 + usize::from(sets.subtree_size == 1) - usize::from(anchor_is_leaf)
}

/// Size of the neighbour set after a `Remove`: the removed clique joins
/// it, and its other tree neighbours (all previously anchored on it)
/// leave.
pub(crate) fn reverse_count_remove_from(
    t: &JunctionTree,
    sets: &PartitionSets,
    m: &MoveProposal,
) -> usize {
    debug_assert!(matches!(m.kind, MoveKind::Remove));
    sets.neighbours.len() + 2 - t.degree(m.target)
}

pub fn reverse_count_add(t: &JunctionTree, m: &MoveProposal) -> usize {
    reverse_count_add_from(&partition_sets(t, m.v), m)
}

pub fn reverse_count_remove(t: &JunctionTree, m: &MoveProposal) -> usize {
    reverse_count_remove_from(t, &partition_sets(t, m.v), m)
}

const SEARCH_MAX_P: usize = 8;

/// True iff connecting every vertex of `v_set` to every vertex of `u_set`
/// keeps the graph decomposable.
///
/// Preconditions: `v_set` and `u_set` are disjoint, each complete in `g`,
/// with no edges between them, and `p <= 8`.
///
/// Implemented as the peel search the decomposability conditions describe:
/// at each stage, some reduced junction tree must offer a clique adjacent
/// to the subtree of cliques containing `v_set` whose members cover the
/// next batch of `u_set`; connecting that batch and recursing consumes all
/// of `u_set` exactly when the full update is valid.
pub fn check_connect_valid(
    g: &Graph,
    v_set: &VertexSet,
    u_set: &VertexSet,
) -> Result<bool, PerturbationError> {
    if g.p() > SEARCH_MAX_P {
        return Err(PerturbationError::TooLarge {
            p: g.p(),
            max: SEARCH_MAX_P,
        });
    }
    assert!(v_set.is_disjoint(u_set), "vertex sets must be disjoint");
    assert!(!v_set.is_empty(), "empty connect source");
    assert!(
        g.is_complete_set(v_set) && g.is_complete_set(u_set),
        "vertex sets must be complete"
    );
    assert!(
        v_set
            .iter()
            .all(|v| g.neighbors(v).is_disjoint(u_set)),
        "sets are already connected"
    );
    let mut memo = HashMap::new();
    Ok(peel_search(g, v_set, u_set, MoveKind::Add, &mut memo))
}

/// True iff disconnecting every `v_set`-`u_set` edge keeps the graph
/// decomposable.
///
/// Preconditions: `v_set` and `u_set` are disjoint with their union
/// complete in `g`, and `p <= 8`.
///
/// Same peel search with the leaf-clique base case: each batch must sit in
/// a leaf of the subtree of cliques containing `v_set` in some reduced
/// junction tree, and that leaf must be the only maximal clique containing
/// the batch together with `v_set`.
pub fn check_disconnect_valid(
    g: &Graph,
    v_set: &VertexSet,
    u_set: &VertexSet,
) -> Result<bool, PerturbationError> {
    if g.p() > SEARCH_MAX_P {
        return Err(PerturbationError::TooLarge {
            p: g.p(),
            max: SEARCH_MAX_P,
        });
    }
    assert!(v_set.is_disjoint(u_set), "vertex sets must be disjoint");
    assert!(!v_set.is_empty(), "empty disconnect source");
    assert!(
        g.is_complete_set(&v_set.union(u_set)),
        "union must be complete"
    );
    let mut memo = HashMap::new();
    Ok(peel_search(g, v_set, u_set, MoveKind::Remove, &mut memo))
}

fn peel_search(
    g: &Graph,
    v_set: &VertexSet,
    remaining: &VertexSet,
    kind: MoveKind,
    memo: &mut HashMap<VertexSet, bool>,
) -> bool {
    if remaining.is_empty() {
        return true;
    }
    if let Some(&r) = memo.get(remaining) {
        return r;
    }
    // Candidate batches: intersections of `remaining` with an eligible
    // clique, over all reduced junction trees of the current graph.
    let reduced = g.mcs_clique_tree().expect("graph stays decomposable");
    let cliques: Vec<VertexSet> = (0..reduced.node_count())
        .map(|i| reduced.clique(i).clone())
        .collect();
    let mut windows: Vec<VertexSet> = Vec::new();
    for edges in enumerate_junction_trees(&cliques, g.p()) {
        let tree = JunctionTree::from_parts(g.p(), cliques.clone(), &edges)
            .expect("enumerated tree");
        let housing: VertexSet = (0..tree.node_count())
            .filter(|&i| v_set.is_subset(tree.clique(i)))
            .collect();
        debug_assert!(!housing.is_empty());
        let eligible: Vec<usize> = match kind {
            MoveKind::Add => {
                let mut nodes = Vec::new();
                for i in housing.iter() {
                    for &j in tree.neighbors(i) {
                        if !housing.contains(j) {
                            nodes.push(j);
                        }
                    }
                }
                nodes
            }
            // Leaves of the housing subtree; a lone housing clique counts.
            MoveKind::Remove => housing
                .iter()
                .filter(|&i| {
                    tree.neighbors(i)
                        .iter()
                        .filter(|&&j| housing.contains(j))
                        .count()
                        <= 1
                })
                .collect(),
        };
        for node in eligible {
            let w = tree.clique(node).intersection(remaining);
            if !w.is_empty() && !windows.contains(&w) {
                windows.push(w);
            }
        }
    }
    let mut result = false;
    'outer: for w in &windows {
        let members = w.to_vec();
        for mask in 1u64..1 << members.len() {
            let batch: VertexSet = members
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &u)| u)
                .collect();
            if matches!(kind, MoveKind::Remove) && !uniquely_housed(g, &v_set.union(&batch)) {
                continue;
            }
            let mut g2 = g.clone();
            for v in v_set.iter() {
                for u in batch.iter() {
                    match kind {
                        MoveKind::Add => g2.add_edge(v, u),
                        MoveKind::Remove => g2.remove_edge(v, u),
                    }
                }
            }
            debug_assert!(g2.is_chordal());
            if peel_search(&g2, v_set, &remaining.difference(&batch), kind, memo) {
                result = true;
                break 'outer;
            }
        }
    }
    memo.insert(remaining.clone(), result);
    result
}

/// True when exactly one maximal clique of `g` contains `set`.
fn uniquely_housed(g: &Graph, set: &VertexSet) -> bool {
    let reduced = g.mcs_clique_tree().expect("decomposable");
    (0..reduced.node_count())
        .filter(|&i| set.is_subset(reduced.clique(i)))
        .count()
        == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_decomposable_graphs;
    use crate::tree_gen::{attempt_once_walk, random_tree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vs(p: usize, members: &[usize]) -> VertexSet {
        VertexSet::from_members(p, members)
    }

    /// Brute-force re-derivation of the two sets straight from their
    /// definitions, scanning every node.
    fn partition_sets_naive(t: &JunctionTree, v: usize) -> (Vec<Anchored>, Vec<Anchored>) {
        let housing: Vec<usize> = (0..t.node_count())
            .filter(|&i| t.clique(i).contains(v))
            .collect();
        let mut nei = Vec::new();
        for &i in &housing {
            for &j in t.neighbors(i) {
                if !t.clique(j).contains(v) {
                    nei.push(Anchored { node: j, anchor: i });
                }
            }
        }
        nei.sort_unstable_by_key(|a| a.node);
        let mut bd = Vec::new();
        if housing.len() > 1 {
            for &i in &housing {
                let inside: Vec<usize> = t
                    .neighbors(i)
                    .iter()
                    .copied()
                    .filter(|&j| t.clique(j).contains(v))
                    .collect();
                if inside.len() == 1 {
                    bd.push(Anchored {
                        node: i,
                        anchor: inside[0],
                    });
                }
            }
        }
        (nei, bd)
    }

    fn random_state(rng: &mut impl Rng, n: usize) -> JunctionTree {
        let skel = random_tree(n, rng);
        attempt_once_walk(&skel, rng)
    }

    #[test]
    fn partition_sets_match_definition_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let n = 2 + rng.gen_range(0..8);
            let t = random_state(&mut rng, n);
            for v in 0..n {
                let sets = partition_sets(&t, v);
                let (nei, bd) = partition_sets_naive(&t, v);
                assert_eq!(sets.neighbours, nei);
                assert_eq!(sets.boundary, bd);
                assert_eq!(sets.subtree_size, t.vertex_nodes(v).len());
                // Disjointness with unique anchors.
                for a in &sets.neighbours {
                    assert!(!sets.boundary.iter().any(|b| b.node == a.node));
                }
            }
        }
    }

    #[test]
    fn singleton_subtree_has_empty_boundary() {
        // Vertex 2 housed in a single clique on a 3-node path.
        let t = JunctionTree::from_parts(
            3,
            vec![vs(3, &[0]), vs(3, &[0, 1, 2]), vs(3, &[1])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let sets = partition_sets(&t, 2);
        assert!(sets.boundary.is_empty());
        assert_eq!(
            sets.neighbours,
            vec![
                Anchored { node: 0, anchor: 1 },
                Anchored { node: 2, anchor: 1 }
            ]
        );
    }

    #[test]
    fn moves_toggle_exactly_the_stated_edges_and_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0usize;
        while checked < 1000 {
            let n = 2 + rng.gen_range(0..9);
            let mut t = random_state(&mut rng, n);
            let v = rng.gen_range(0..n);
            let sets = partition_sets(&t, v);
            let kind = if rng.gen::<bool>() {
                MoveKind::Add
            } else {
                MoveKind::Remove
            };
            let pool = match kind {
                MoveKind::Add => &sets.neighbours,
                MoveKind::Remove => &sets.boundary,
            };
            if pool.is_empty() {
                continue;
            }
            let target = pool[rng.gen_range(0..pool.len())];
            let m = MoveProposal::build(&t, v, kind, target);
            let g_before = t.to_graph();
            let before = t.clone();
            apply_move(&mut t, &m).unwrap();
            let g_after = t.to_graph();
            assert!(g_after.is_chordal(), "move broke chordality");
            assert!(t.is_junction_tree());
            for &u in &m.edges_changed {
                assert_eq!(g_after.has_edge(v, u), matches!(kind, MoveKind::Add));
                assert_eq!(g_before.has_edge(v, u), matches!(kind, MoveKind::Remove));
            }
            let mut expected = g_before.clone();
            for &u in &m.edges_changed {
                match kind {
                    MoveKind::Add => expected.add_edge(v, u),
                    MoveKind::Remove => expected.remove_edge(v, u),
                }
            }
            assert_eq!(g_after, expected);
            // Round trip through the inverse restores the tree exactly.
            apply_move(&mut t, &m.inverse()).unwrap();
            assert_eq!(t, before);
            checked += 1;
        }
    }

    #[test]
    fn congruence_after_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0usize;
        while checked < 500 {
            let n = 2 + rng.gen_range(0..8);
            let mut t = random_state(&mut rng, n);
            let v = rng.gen_range(0..n);
            let sets = partition_sets(&t, v);
            let kind = if rng.gen::<bool>() {
                MoveKind::Add
            } else {
                MoveKind::Remove
            };
            let pool = match kind {
                MoveKind::Add => &sets.neighbours,
                MoveKind::Remove => &sets.boundary,
            };
            if pool.is_empty() {
                continue;
            }
            let target = pool[rng.gen_range(0..pool.len())];
            let m = MoveProposal::build(&t, v, kind, target);
            apply_move(&mut t, &m).unwrap();
            let after = partition_sets(&t, v);
            match kind {
                MoveKind::Add => {
                    assert!(after.boundary.iter().any(|a| a.node == m.target));
                }
                MoveKind::Remove => {
                    assert!(after.neighbours.iter().any(|a| a.node == m.target));
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn stale_proposal_rejected() {
        let t0 = JunctionTree::no_edge(3, &[(0, 1), (1, 2)]).unwrap();
        let mut t = t0.clone();
        let sets = partition_sets(&t, 0);
        let m = MoveProposal::build(&t, 0, MoveKind::Add, sets.neighbours[0]);
        apply_move(&mut t, &m).unwrap();
        assert!(matches!(
            apply_move(&mut t, &m),
            Err(PerturbationError::StaleProposal)
        ));
        // Clique content drift also invalidates.
        let mut t = t0.clone();
        let m = MoveProposal::build(&t, 0, MoveKind::Add, sets.neighbours[0]);
        t.add_vertex_to_clique(m.target, 2);
        assert!(matches!(
            apply_move(&mut t, &m),
            Err(PerturbationError::StaleProposal)
        ));
    }

    #[test]
    fn reverse_counts_match_materialized_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut adds = 0usize;
        let mut removes = 0usize;
        while adds + removes < 2000 {
            let n = 2 + rng.gen_range(0..9);
            let mut t = random_state(&mut rng, n);
            let v = rng.gen_range(0..n);
            let sets = partition_sets(&t, v);
            let kind = if rng.gen::<bool>() {
                MoveKind::Add
            } else {
                MoveKind::Remove
            };
            let pool = match kind {
                MoveKind::Add => &sets.neighbours,
                MoveKind::Remove => &sets.boundary,
            };
            if pool.is_empty() {
                continue;
            }
            let target = pool[rng.gen_range(0..pool.len())];
            let m = MoveProposal::build(&t, v, kind, target);
            let predicted = match kind {
                MoveKind::Add => {
                    adds += 1;
                    reverse_count_add(&t, &m)
                }
                MoveKind::Remove => {
                    removes += 1;
                    reverse_count_remove(&t, &m)
                }
            };
            apply_move(&mut t, &m).unwrap();
            let after = partition_sets(&t, v);
            let actual = match kind {
                MoveKind::Add => after.boundary.len(),
                MoveKind::Remove => after.neighbours.len(),
            };
            assert_eq!(predicted, actual, "kind {kind:?}");
        }
        assert!(adds > 100 && removes > 100);
    }

    #[test]
    fn add_to_lone_housing_clique_leaves_two_removable() {
        // Vertex 0 housed only in node 0; adding it next door makes both
        // copies removable.
        let t = JunctionTree::no_edge(3, &[(0, 1), (1, 2)]).unwrap();
        let sets = partition_sets(&t, 0);
        assert_eq!(sets.subtree_size, 1);
        let m = MoveProposal::build(&t, 0, MoveKind::Add, sets.neighbours[0]);
        assert_eq!(reverse_count_add(&t, &m), 2);
        let mut t2 = t.clone();
        apply_move(&mut t2, &m).unwrap();
        assert_eq!(partition_sets(&t2, 0).boundary.len(), 2);
    }

    #[test]
    fn neighbour_symmetry_for_unconnected_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let n = 2 + rng.gen_range(0..8);
            let t = random_state(&mut rng, n);
            let g = t.to_graph();
            for v in 0..n {
                for u in 0..n {
                    if u == v || g.has_edge(u, v) {
                        continue;
                    }
                    let u_reachable = neighbour_set(&t, v)
                        .iter()
                        .any(|a| t.clique(a.node).contains(u));
                    let v_reachable = neighbour_set(&t, u)
                        .iter()
                        .any(|a| t.clique(a.node).contains(v));
                    assert_eq!(u_reachable, v_reachable);
                }
            }
        }
    }

    #[test]
    fn connect_examples() {
        // Path 0-1-2: adding 0-2 closes a triangle.
        let g = Graph::with_edges(3, &[(0, 1), (1, 2)]);
        assert!(check_connect_valid(&g, &vs(3, &[0]), &vs(3, &[2])).unwrap());

        // Path 0-1-2-3: adding 0-3 creates a chordless 4-cycle.
        let g = Graph::with_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(!check_connect_valid(&g, &vs(4, &[0]), &vs(4, &[3])).unwrap());
    }

    #[test]
    fn disconnect_examples() {
        let g = Graph::complete(3);
        assert!(check_disconnect_valid(&g, &vs(3, &[0]), &vs(3, &[1])).unwrap());

        // Two triangles sharing edge {1,2}: removing it leaves a 4-cycle.
        let g = Graph::with_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        assert!(!check_disconnect_valid(&g, &vs(4, &[1]), &vs(4, &[2])).unwrap());

        // K4 minus nothing: disconnect one vertex from two others.
        let g = Graph::complete(4);
        let valid = check_disconnect_valid(&g, &vs(4, &[0]), &vs(4, &[1, 2])).unwrap();
        let mut g2 = g.clone();
        g2.remove_edge(0, 1);
        g2.remove_edge(0, 2);
        assert_eq!(valid, g2.is_chordal());
    }

    #[test]
    fn size_guard() {
        let g = Graph::new(9);
        assert!(matches!(
            check_connect_valid(&g, &vs(9, &[0]), &vs(9, &[1])),
            Err(PerturbationError::TooLarge { .. })
        ));
    }

    #[test]
    fn theorem_predicates_agree_with_oracle_p4() {
        let mut checked = 0usize;
        for g in enumerate_decomposable_graphs(4).unwrap() {
            checked += exhaustive_agreement(&g);
        }
        assert!(checked > 100);
    }

    /// Returns the number of (V, U) cases checked for one graph.
    pub(super) fn exhaustive_agreement(g: &Graph) -> usize {
        let p = g.p();
        let mut count = 0usize;
        for vmask in 1u64..1 << p {
            let v_set: VertexSet = (0..p).filter(|&i| vmask >> i & 1 == 1).collect();
            if !g.is_complete_set(&v_set) {
                continue;
            }
            for umask in 1u64..1 << p {
                if vmask & umask != 0 {
                    continue;
                }
                let u_set: VertexSet = (0..p).filter(|&i| umask >> i & 1 == 1).collect();
                if !g.is_complete_set(&u_set) {
                    continue;
                }
                let crossing: Vec<(usize, usize)> = v_set
                    .iter()
                    .flat_map(|v| u_set.iter().map(move |u| (v, u)))
                    .collect();
                let connected = crossing.iter().filter(|&&(v, u)| g.has_edge(v, u)).count();
                if connected == 0 {
                    let mut g2 = g.clone();
                    for &(v, u) in &crossing {
                        g2.add_edge(v, u);
                    }
                    assert_eq!(
                        check_connect_valid(g, &v_set, &u_set).unwrap(),
                        g2.is_chordal(),
                        "connect disagreement: {g:?} V={v_set:?} U={u_set:?}"
                    );
                    count += 1;
                } else if connected == crossing.len() && g.is_complete_set(&v_set.union(&u_set)) {
                    let mut g2 = g.clone();
                    for &(v, u) in &crossing {
                        g2.remove_edge(v, u);
                    }
                    assert_eq!(
                        check_disconnect_valid(g, &v_set, &u_set).unwrap(),
                        g2.is_chordal(),
                        "disconnect disagreement: {g:?} V={v_set:?} U={u_set:?}"
                    );
                    count += 1;
                }
            }
        }
        count
    }
}
