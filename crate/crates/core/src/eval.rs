//! Rank-recovery metrics and testing oracles: tie-adjusted Kendall tau,
//! the single-label collapse construction, and brute-force tree search.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphBuilder, LabeledGraph};
use crate::tree::{LabelTree, TreeNode};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("rankings cover different node sets")]
    NodeSetMismatch,
    #[error("tau is undefined: a ranking with fewer than two distinct values has no untied pairs")]
    AllTied,
    #[error("node {0} must have exactly one label, found {1}")]
    NotSingleLabel(String, usize),
    #[error("exhaustive search guard: {0}")]
    SearchGuard(String),
}

/// Tau-b with the pair counts behind it. `ties` is the number of unordered
/// pairs tied in at least one of the two rankings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: f64,
    pub concordant: u64,
    pub discordant: u64,
    pub ties: u64,
}

/// Tie-adjusted (tau-b) rank correlation between two rankings of the same
/// items, `O(n log n)` by merge-sort inversion counting.
pub fn kendall_tau(a: &[usize], b: &[usize]) -> Result<TauResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::NodeSetMismatch);
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::AllTied);
    }
    let mut pairs: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_unstable();

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let mut ties_a = 0u64; // pairs tied in a
    let mut ties_both = 0u64;
    {
        let mut run_a = 1u64;
        let mut run_ab = 1u64;
        for i in 1..n {
            if pairs[i].0 == pairs[i - 1].0 {
                run_a += 1;
                if pairs[i].1 == pairs[i - 1].1 {
                    run_ab += 1;
                } else {
                    ties_both += run_ab * (run_ab - 1) / 2;
                    run_ab = 1;
                }
            } else {
                ties_a += run_a * (run_a - 1) / 2;
                run_a = 1;
                ties_both += run_ab * (run_ab - 1) / 2;
                run_ab = 1;
            }
        }
        ties_a += run_a * (run_a - 1) / 2;
        ties_both += run_ab * (run_ab - 1) / 2;
    }

    // Discordant pairs are strict inversions of b once sorted by (a, b).
    let discordant = count_inversions(&mut pairs.iter().map(|p| p.1).collect::<Vec<_>>());

    // The inversion pass leaves a copy sorted by b; count its ties directly.
    let mut by_b: Vec<usize> = b.to_vec();
    by_b.sort_unstable();
    let mut ties_b = 0u64;
    {
        let mut run = 1u64;
        for i in 1..n {
            if by_b[i] == by_b[i - 1] {
                run += 1;
            } else {
                ties_b += run * (run - 1) / 2;
                run = 1;
            }
        }
        ties_b += run * (run - 1) / 2;
    }

    if ties_a == n0 || ties_b == n0 {
        return Err(EvalError::AllTied);
    }
    // n0 + ties_both >= ties_a + ties_b, so this order cannot underflow
    let concordant = n0 + ties_both - ties_a - ties_b - discordant;
    let denom = ((n0 - ties_a) as f64 * (n0 - ties_b) as f64).sqrt();
    let tau = ((concordant as f64 - discordant as f64) / denom).clamp(-1.0, 1.0);
    Ok(TauResult {
        tau,
        concordant,
        discordant,
        ties: ties_a + ties_b - ties_both,
    })
}

/// Aligns two name-keyed rankings and computes tau-b; the key sets must be
/// identical.
pub fn kendall_tau_named(
    a: &BTreeMap<String, usize>,
    b: &BTreeMap<String, usize>,
) -> Result<TauResult, EvalError> {
    if a.len() != b.len() || !a.keys().eq(b.keys()) {
        return Err(EvalError::NodeSetMismatch);
    }
    let xs: Vec<usize> = a.values().copied().collect();
    let ys: Vec<usize> = b.values().copied().collect();
    kendall_tau(&xs, &ys)
}

/// Strict inversions via bottom-up merge sort; equal elements keep their
/// order and are not counted.
fn count_inversions(values: &mut [usize]) -> u64 {
    let n = values.len();
    let mut buf = vec![0usize; n];
    let mut swaps = 0u64;
    let mut width = 1usize;
    while width < n {
        let mut start = 0usize;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    buf[k] = values[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        values[..n].copy_from_slice(&buf[..n]);
        width *= 2;
    }
    swaps
}

/// Quotient graph over single-label nodes: one node per label, edges merged
/// by weight, same-label edges dropped. Each new node carries its own label.
pub fn collapse_by_label(g: &LabeledGraph) -> Result<LabeledGraph, EvalError> {
    for v in 0..g.node_count() {
        let k = g.labels_of(v).len();
        if k != 1 {
            return Err(EvalError::NotSingleLabel(g.node_name(v).to_string(), k));
        }
    }
    let mut b = GraphBuilder::new();
    for l in 0..g.label_count() {
        let name = g.label_name(l);
        b.add_node(name);
        b.add_label(name, name);
    }
    for e in g.edges() {
        let lu = g.labels_of(e.source)[0];
        let lv = g.labels_of(e.target)[0];
        if lu == lv {
            continue;
        }
        b.add_edge(g.label_name(lu), g.label_name(lv), e.weight)
            .expect("weights come from a valid graph");
    }
    Ok(b.build())
}

#[derive(Clone)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

fn shapes_with_leaves(leaves: usize) -> Vec<Shape> {
    if leaves == 1 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left in 1..leaves {
        for l in shapes_with_leaves(left) {
            for r in shapes_with_leaves(leaves - left) {
                out.push(Shape::Node(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn internal_count(s: &Shape) -> usize {
    match s {
        Shape::Leaf => 0,
        Shape::Node(l, r) => 1 + internal_count(l) + internal_count(r),
    }
}

fn realize(shape: &Shape, choices: &[usize], g: &LabeledGraph, next: &mut usize) -> TreeNode {
    match shape {
        Shape::Leaf => TreeNode::leaf(),
        Shape::Node(l, r) => {
            let choice = choices[*next];
            *next += 1;
            let label = g.label_name(choice / 2).to_string();
            let criterion = choice % 2 == 0;
            let left = realize(l, choices, g, next);
            let right = realize(r, choices, g, next);
            TreeNode::split(label, criterion, None, left, right)
        }
    }
}

/// Finds a minimum-score tree with at most `max_leaves` leaves by full
/// enumeration: every ordered shape, every assignment of (label, criterion)
/// to the internal nodes. Both criteria are enumerated; swapping a node's
/// children while flipping its criterion sends nodes to the same subtrees
/// but re-derives leaf indices, so it does not cover the other polarity.
///
/// Exponential by nature, hence the guard rails: at most 4 distinct labels
/// and at most 5 leaves.
pub fn exhaustive_tree_search(
    g: &LabeledGraph,
    max_leaves: usize,
) -> Result<(LabelTree, f64), EvalError> {
    if max_leaves < 1 || max_leaves > 5 {
        return Err(EvalError::SearchGuard(format!(
            "max_leaves must be in 1..=5, got {max_leaves}"
        )));
    }
    if g.label_count() > 4 {
        return Err(EvalError::SearchGuard(format!(
            "at most 4 distinct labels supported, graph has {}",
            g.label_count()
        )));
    }
    let choice_base = 2 * g.label_count();
    let mut best: Option<(LabelTree, f64)> = None;
    for leaves in 1..=max_leaves {
        if leaves > 1 && g.label_count() == 0 {
            break;
        }
        for shape in shapes_with_leaves(leaves) {
            let internals = internal_count(&shape);
            let mut choices = vec![0usize; internals];
            loop {
                let mut next = 0usize;
                let root = realize(&shape, &choices, g, &mut next);
                let tree = LabelTree::assemble(root).expect("enumerated tree is valid");
                let score = tree.score(g);
                if best.as_ref().map_or(true, |(_, s)| score < *s) {
                    best = Some((tree, score));
                }
                // odometer over (label, criterion) assignments
                let mut pos = internals;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    choices[pos] += 1;
                    if choices[pos] < choice_base {
                        break;
                    }
                    choices[pos] = 0;
                }
                if internals == 0 || choices.iter().all(|&a| a == 0) {
                    break;
                }
            }
        }
    }
    Ok(best.expect("single leaf always enumerated"))
}
