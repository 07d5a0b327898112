//! Rank the nodes of a labeled, weighted, directed graph into tiers.
//!
//! A hierarchy is described by a [`LabelTree`]: an ordered binary tree whose
//! internal nodes test label membership and whose leaves, read left to right,
//! are rank indices. The quality of a tree is its agony score, the weighted
//! sum of backward-edge penalties. [`greedy`] builds a tree by repeatedly
//! performing the split with the largest score reduction, [`prune`] enforces
//! a leaf-count budget, and the [`synth`] and [`eval`] modules provide a
//! planted-hierarchy generator and rank-recovery metrics.

pub mod eval;
pub mod graph;
pub mod greedy;
pub mod prune;
pub mod synth;
#[cfg(test)]
pub(crate) mod testutil;
pub mod tree;

pub use eval::{collapse_by_label, exhaustive_tree_search, kendall_tau, kendall_tau_named, TauResult};
pub use graph::{parse_graph, Edge, GraphBuilder, GraphError, GraphSummary, LabeledGraph};
pub use greedy::{greedy, GreedyRun, SplitCandidate, SplitStep};
pub use prune::{prune, PruneError, PruneTable};
pub use synth::{generate, write_dataset, SynthConfig, SynthError};
pub use tree::{penalty, score_ranks, LabelTree, RankAssignment, TreeError, TreeNode};
