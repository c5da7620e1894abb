//! Bayesian structure learning for decomposable Gaussian graphical models
//! by Markov chain Monte Carlo on junction trees.
//!
//! The chain's state is an expanded junction tree: a labeled tree whose
//! nodes carry vertex sets (possibly empty or non-maximal) subject to the
//! junction property. Single-vertex moves add or remove a vertex from a
//! clique; the sets of cliques eligible for each move type are cheap to
//! enumerate and every proposal preserves decomposability of the
//! represented graph. Two samplers are provided: a reversible single-move
//! Metropolis-Hastings chain and a non-reversible variant that evaluates
//! and applies all eligible moves for a vertex in one step.
//!
//! Modules follow the pipeline:
//!
//! * [`vertex_set`], [`graph`] — bit-set subsets, chordal graphs, and the
//!   maximum cardinality search machinery (plus small-scale enumeration
//!   oracles used heavily by the tests).
//! * [`junction_tree`] — the expanded tree state, compression to the
//!   reduced tree, and validation.
//! * [`perturbation`] — eligible-move sets, move application, closed-form
//!   reverse-proposal counts, and predicates deciding when multi-edge
//!   connect/disconnect updates keep a graph decomposable.
//! * [`tree_gen`] — random skeletons, random junction trees, skeleton
//!   resampling, and banded test graphs.
//! * [`prior`], [`ggm`] — clique-separator factorization priors and the
//!   Gaussian marginal-likelihood evidence.
//! * [`sampler`], [`diagnostics`] — the two chains, trace recording, and
//!   post-processing into the usual chain diagnostics.

#![forbid(unsafe_code)]

pub mod diagnostics;
pub mod ggm;
pub mod graph;
pub mod junction_tree;
pub mod perturbation;
pub mod prior;
pub mod sampler;
pub mod tree_gen;
pub mod vertex_set;
