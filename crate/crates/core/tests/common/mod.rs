//! Independent oracles for the acceptance suite. Everything here recomputes
//! from first principles (edge enumeration, exhaustive enumeration, direct
//! pair counting) and never calls into the incremental paths it checks.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::Rng;
use tiertree::tree::TreeNode;
use tiertree::{GraphBuilder, LabelTree, LabeledGraph};

/// Random graph with integer weights 1..=3 and up to `label_count` labels,
/// 0..=3 per node.
pub fn random_graph(rng: &mut StdRng, n: usize, m: usize, label_count: usize) -> LabeledGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_node(&format!("n{i}"));
    }
    for _ in 0..m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let w = rng.random_range(1..=3) as f64;
        b.add_edge(&format!("n{u}"), &format!("n{v}"), w).unwrap();
    }
    if label_count > 0 {
        for i in 0..n {
            let count = rng.random_range(0..=3usize.min(label_count));
            for _ in 0..count {
                let l = rng.random_range(0..label_count);
                b.add_label(&format!("n{i}"), &format!("t{l}"));
            }
        }
    }
    b.build()
}

/// Per-leaf (back, inback[], outback[], diff[]) recomputed from the pristine
/// edge list given the current left-to-right leaf membership.
#[allow(clippy::type_complexity)]
pub fn recompute_counters(
    g: &LabeledGraph,
    leaves: &[Vec<usize>],
) -> Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = g.node_count();
    let mut leaf_of = vec![usize::MAX; n];
    for (i, members) in leaves.iter().enumerate() {
        for &v in members {
            leaf_of[v] = i;
        }
    }
    leaves
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let mut back = 0.0;
            let mut inback = vec![0.0; members.len()];
            let mut outback = vec![0.0; members.len()];
            let mut diff = vec![0.0; members.len()];
            let index_of: HashMap<usize, usize> = members
                .iter()
                .copied()
                .enumerate()
                .map(|(k, v)| (v, k))
                .collect();
            for e in g.edges() {
                let (lu, lv) = (leaf_of[e.source], leaf_of[e.target]);
                if lu > i && lv < i {
                    back += e.weight;
                }
                if lv == i {
                    let k = index_of[&e.target];
                    if lu > i {
                        inback[k] += e.weight;
                    }
                    if lu >= i {
                        diff[k] += e.weight;
                    }
                }
                if lu == i {
                    let k = index_of[&e.source];
                    if lv < i {
                        outback[k] += e.weight;
                    }
                    if lv <= i {
                        diff[k] -= e.weight;
                    }
                }
            }
            (back, inback, outback, diff)
        })
        .collect()
}

/// Best score over every prunable subtree with at most `k` leaves, by
/// enumerating the subtrees and rescoring each against the graph.
pub fn exhaustive_prune_best(tree: &LabelTree, g: &LabeledGraph, k: usize) -> f64 {
    fn fragments(node: &TreeNode, k: usize) -> Vec<(TreeNode, usize)> {
        let mut out = vec![(TreeNode::leaf(), 1)];
        if let TreeNode::Split {
            label,
            criterion,
            gain,
            left,
            right,
        } = node
        {
            for (lf, ln) in fragments(left, k) {
                if ln >= k {
                    continue;
                }
                for (rf, rn) in fragments(right, k - ln) {
                    out.push((
                        TreeNode::Split {
                            label: label.clone(),
                            criterion: *criterion,
                            gain: *gain,
                            left: Box::new(lf.clone()),
                            right: Box::new(rf),
                        },
                        ln + rn,
                    ));
                }
            }
        }
        out
    }
    fragments(tree.root(), k)
        .into_iter()
        .map(|(root, _)| LabelTree::assemble(root).unwrap().score(g))
        .fold(f64::INFINITY, f64::min)
}

/// Tau-b straight from the definition: every unordered pair compared once.
/// Returns `None` when a side is fully tied.
pub fn quadratic_tau(a: &[usize], b: &[usize]) -> Option<f64> {
    let n = a.len();
    let (mut con, mut dis, mut ta, mut tb) = (0i64, 0i64, 0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            let ca = a[i].cmp(&a[j]);
            let cb = b[i].cmp(&b[j]);
            if ca == std::cmp::Ordering::Equal {
                ta += 1;
            }
            if cb == std::cmp::Ordering::Equal {
                tb += 1;
            }
            if ca == std::cmp::Ordering::Equal || cb == std::cmp::Ordering::Equal {
                continue;
            }
            if ca == cb {
                con += 1;
            } else {
                dis += 1;
            }
        }
    }
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    if ta == n0 || tb == n0 || n < 2 {
        return None;
    }
    let denom = ((n0 - ta) as f64 * (n0 - tb) as f64).sqrt();
    Some((con - dis) as f64 / denom)
}

/// Random tree over the given label names, used to probe scoring paths.
pub fn random_tree(rng: &mut StdRng, labels: &[String], budget: usize) -> TreeNode {
    if budget <= 1 || labels.is_empty() || rng.random_bool(0.3) {
        return TreeNode::leaf();
    }
    let label = labels[rng.random_range(0..labels.len())].clone();
    let criterion = rng.random_bool(0.5);
    let left = random_tree(rng, labels, budget / 2);
    let right = random_tree(rng, labels, budget - budget / 2);
    TreeNode::split(label, criterion, None, left, right)
}
