//! Shared fixtures for unit tests.

use std::io::Cursor;

use rand::rngs::StdRng;
use rand::Rng;

use crate::graph::{parse_graph, GraphBuilder, LabeledGraph};
use crate::tree::{LabelTree, TreeNode};

pub const TOY_EDGES: &str = "v1\tv2\nv3\tv1\nv2\tv3\nv2\tv4\nv3\tv4\nv4\tv5\nv4\tv1\n";
pub const TOY_LABELS: &str = "v1\tA\tB\nv2\tA\tB\nv3\tA\tB\nv4\tA\nv5\tB\tC\n";

/// Five nodes v1..v5 with seven unit edges and labels A/B/C. The matching
/// tree in [`toy_tree`] scores 5 on it.
pub fn toy_graph() -> LabeledGraph {
    parse_graph(Cursor::new(TOY_EDGES), Cursor::new(TOY_LABELS)).unwrap()
}

/// Root splits on A (holders left), then the left child splits on B.
pub fn toy_tree() -> LabelTree {
    LabelTree::assemble(TreeNode::split(
        "A",
        true,
        None,
        TreeNode::split("B", true, None, TreeNode::leaf(), TreeNode::leaf()),
        TreeNode::leaf(),
    ))
    .unwrap()
}

/// Random graph with integer weights: `n` nodes, up to `m` sampled edges
/// (duplicates merge, self-loops drop), and up to `label_count` labels with
/// each node carrying 0..=3 of them.
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
