//! Clique-separator factorization priors over junction trees.
//!
//! A law assigns a positive weight `phi` to every clique and `psi` to
//! every separator; the tree's prior is the product of clique weights over
//! the product of separator weights, never normalized. All arithmetic is
//! in log space. Both weights are 1 on the empty set so that empty cliques
//! and separators contribute neutrally.

use crate::perturbation::MoveProposal;
use crate::vertex_set::VertexSet;
use std::sync::Arc;

type LogWeight = Arc<dyn Fn(&VertexSet) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CliqueSeparatorLaw {
    /// `phi = psi = 1`: uniform over junction trees.
    Uniform,
    /// `phi(C) = exp(alpha (|C| - 1))`, `psi(S) = exp(beta |S|)`.
    ExpFamily { alpha: f64, beta: f64 },
    /// Arbitrary log weights; must be finite on every subset.
    Custom {
        log_phi: LogWeight,
        log_psi: LogWeight,
    },
}

impl CliqueSeparatorLaw {
    pub fn log_phi(&self, c: &VertexSet) -> f64 {
        match self {
            CliqueSeparatorLaw::Uniform => 0.0,
            CliqueSeparatorLaw::ExpFamily { alpha, .. } => {
                if c.is_empty() {
                    0.0
                } else {
                    alpha * (c.len() as f64 - 1.0)
                }
            }
            CliqueSeparatorLaw::Custom { log_phi, .. } => log_phi(c),
        }
    }

    pub fn log_psi(&self, s: &VertexSet) -> f64 {
        match self {
            CliqueSeparatorLaw::Uniform => 0.0,
            CliqueSeparatorLaw::ExpFamily { beta, .. } => beta * s.len() as f64,
            CliqueSeparatorLaw::Custom { log_psi, .. } => log_psi(s),
        }
    }

    /// Log prior ratio of a move: the updated clique against the old one,
    /// and the updated separator to the anchor against the old one.
    pub fn log_prior_ratio(&self, m: &MoveProposal) -> f64 {
        if matches!(self, CliqueSeparatorLaw::Uniform) {
            return 0.0;
        }
        self.log_phi(&m.clique_after) + self.log_psi(&m.sep_before)
            - self.log_psi(&m.sep_after)
            - self.log_phi(&m.clique_before)
    }
}

impl std::fmt::Debug for CliqueSeparatorLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliqueSeparatorLaw::Uniform => write!(f, "Uniform"),
            CliqueSeparatorLaw::ExpFamily { alpha, beta } => {
                write!(f, "ExpFamily {{ alpha: {alpha}, beta: {beta} }}")
            }
            CliqueSeparatorLaw::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

/// Log prior of a uniform skeleton over the `n^(n-2)` labeled trees.
pub fn log_skeleton_prior(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    -((n as f64) - 2.0) * (n as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction_tree::JunctionTree;
    use crate::perturbation::{partition_sets, MoveKind, MoveProposal};

    fn vs(p: usize, members: &[usize]) -> VertexSet {
        VertexSet::from_members(p, members)
    }

    #[test]
    fn uniform_ratio_is_zero() {
        let t = JunctionTree::no_edge(3, &[(0, 1), (1, 2)]).unwrap();
        let sets = partition_sets(&t, 0);
        let m = MoveProposal::build(&t, 0, MoveKind::Add, sets.neighbours[0]);
        assert_eq!(CliqueSeparatorLaw::Uniform.log_prior_ratio(&m), 0.0);
    }

    #[test]
    fn expfam_add_grows_clique_and_separator_by_one() {
        // Clique {1} with anchor {0,1,2}; adding 0 grows both the clique
        // and the separator by one vertex: ratio alpha - beta.
        let t = JunctionTree::from_parts(
            3,
            vec![vs(3, &[0, 1, 2]), vs(3, &[1])],
            &[(0, 1)],
        )
        .unwrap();
        let law = CliqueSeparatorLaw::ExpFamily {
            alpha: 2.0,
            beta: 4.0,
        };
        let sets = partition_sets(&t, 0);
        let target = sets.neighbours.iter().find(|a| a.node == 1).unwrap();
        let m = MoveProposal::build(&t, 0, MoveKind::Add, *target);
        // phi({0,1})/phi({1}) = e^{2*1}, psi({1})/psi({0,1}) = e^{-4}.
        assert!((law.log_prior_ratio(&m) - (2.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn junction_only_update_matches_nonmaximal_contribution() {
        // Both the target and its update stay inside the anchor, so the
        // ratio collapses to phi(C')psi(C)/(psi(C')phi(C)); with the
        // exponential family that is (alpha-beta) per added vertex.
        let t = JunctionTree::from_parts(
            4,
            vec![vs(4, &[0, 1, 2, 3]), vs(4, &[1, 2])],
            &[(0, 1)],
        )
        .unwrap();
        let law = CliqueSeparatorLaw::ExpFamily {
            alpha: 2.0,
            beta: 4.0,
        };
        let sets = partition_sets(&t, 0);
        let target = sets.neighbours.iter().find(|a| a.node == 1).unwrap();
        let m = MoveProposal::build(&t, 0, MoveKind::Add, *target);
        assert!(m.edges_changed.is_empty(), "junction-only update");
        let xi = (m.clique_after.len() as f64) - (m.clique_before.len() as f64);
        assert!((law.log_prior_ratio(&m) - (2.0 - 4.0) * xi).abs() < 1e-12);
        // Removing again flips the sign.
        let inv = m.inverse();
        assert!((law.log_prior_ratio(&inv) + (2.0 - 4.0) * xi).abs() < 1e-12);
    }

    #[test]
    fn phi_on_empty_set_is_neutral() {
        let law = CliqueSeparatorLaw::ExpFamily {
            alpha: 2.0,
            beta: 4.0,
        };
        assert_eq!(law.log_phi(&VertexSet::empty(4)), 0.0);
        assert_eq!(law.log_psi(&VertexSet::empty(4)), 0.0);
    }

    #[test]
    fn custom_law_plain_exponent() {
        let law = CliqueSeparatorLaw::Custom {
            log_phi: Arc::new(|c: &VertexSet| 2.0 * c.len() as f64),
            log_psi: Arc::new(|s: &VertexSet| 4.0 * s.len() as f64),
        };
        assert_eq!(law.log_phi(&vs(4, &[0, 2])), 4.0);
        assert_eq!(law.log_psi(&vs(4, &[0, 2])), 8.0);
    }

    #[test]
    fn skeleton_prior_values() {
        assert_eq!(log_skeleton_prior(1), 0.0);
        assert_eq!(log_skeleton_prior(2), 0.0);
        assert!((log_skeleton_prior(4) + 2.0 * 4f64.ln()).abs() < 1e-12);
    }
}
