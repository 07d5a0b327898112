//! Leaf-budget pruning by dynamic programming over recorded gains.
//!
//! For a node and a leaf budget `h`, the best retained gain is zero when
//! `h` is 1 (the whole branch collapses into a leaf) and otherwise the
//! node's own gain plus the best way to divide the remaining budget among
//! its children. Gains are trusted as recorded; the score identity against
//! a naive rescoring is checked in tests rather than here.

use thiserror::Error;

use crate::tree::{LabelTree, TreeNode};

#[derive(Debug, Error)]
pub enum PruneError {
    #[error("the tree carries no recorded gains; re-run the greedy ranker to get a prunable tree")]
    MissingGain,
    #[error("leaf budget must be at least 1")]
    ZeroLeafBudget,
}

struct FlatNode {
    label: String,
    criterion: bool,
    gain: f64,
    left: Option<usize>,
    right: Option<usize>,
    leaves: usize,
}

/// Per-node DP rows: `opt[node][h - 1]` is the best retained gain using at
/// most `h` leaves below `node`, for `h` up to the node's own leaf count
/// capped by the query budget. `trace` holds the left-budget argmin used
/// for traceback (smallest on ties).
pub struct PruneTable {
    nodes: Vec<FlatNode>,
    pub opt: Vec<Vec<f64>>,
    pub trace: Vec<Vec<usize>>,
    budget: usize,
}

impl PruneTable {
    /// Builds the table for budgets `1..=k`. Every internal node must carry
    /// a recorded gain.
    pub fn build(tree: &LabelTree, k: usize) -> Result<PruneTable, PruneError> {
        if k == 0 {
            return Err(PruneError::ZeroLeafBudget);
        }
        let nodes = flatten(tree)?;
        let mut opt: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
        let mut trace: Vec<Vec<usize>> = Vec::with_capacity(nodes.len());
        // children precede parents in the flattened order
        for node in &nodes {
            let cap = node.leaves.min(k);
            let mut row = vec![0.0f64; cap];
            let mut trow = vec![0usize; cap];
            if let (Some(l), Some(r)) = (node.left, node.right) {
                for h in 2..=cap {
                    let mut best = f64::INFINITY;
                    let mut best_split = 0usize;
                    for give_left in 1..h {
                        let li = give_left.min(opt[l].len()) - 1;
                        let ri = (h - give_left).min(opt[r].len()) - 1;
                        let value = opt[l][li] + opt[r][ri];
                        if value < best {
                            best = value;
                            best_split = give_left;
                        }
                    }
                    row[h - 1] = node.gain + best;
                    trow[h - 1] = best_split;
                }
            }
            opt.push(row);
            trace.push(trow);
        }
        Ok(PruneTable {
            nodes,
            opt,
            trace,
            budget: k,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Best retained gain at the root for a budget of `h` leaves.
    pub fn opt_root(&self, h: usize) -> f64 {
        let row = &self.opt[self.root()];
        row[h.min(row.len()).max(1) - 1]
    }

    fn rebuild(&self, node: usize, budget: usize) -> TreeNode {
        let flat = &self.nodes[node];
        let budget = budget.min(flat.leaves);
        let (Some(l), Some(r)) = (flat.left, flat.right) else {
            return TreeNode::leaf();
        };
        if budget <= 1 {
            return TreeNode::leaf();
        }
        let give_left = self.trace[node][budget - 1];
        TreeNode::Split {
            label: flat.label.clone(),
            criterion: flat.criterion,
            gain: Some(flat.gain),
            left: Box::new(self.rebuild(l, give_left)),
            right: Box::new(self.rebuild(r, budget - give_left)),
        }
    }
}

fn flatten(tree: &LabelTree) -> Result<Vec<FlatNode>, PruneError> {
    // post-order without recursion; trees can get deep
    let mut out: Vec<FlatNode> = Vec::new();
    enum Frame<'a> {
        Visit(&'a TreeNode),
        Emit(&'a TreeNode),
    }
    let mut stack = vec![Frame::Visit(tree.root())];
    let mut results: Vec<usize> = Vec::new();
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Visit(node) => match node {
                TreeNode::Leaf { .. } => {
                    out.push(FlatNode {
                        label: String::new(),
                        criterion: true,
                        gain: 0.0,
                        left: None,
                        right: None,
                        leaves: 1,
                    });
                    results.push(out.len() - 1);
                }
                TreeNode::Split { left, right, .. } => {
                    stack.push(Frame::Emit(node));
                    stack.push(Frame::Visit(right));
                    stack.push(Frame::Visit(left));
                }
            },
            Frame::Emit(node) => {
                let TreeNode::Split {
                    label,
                    criterion,
                    gain,
                    ..
                } = node
                else {
                    unreachable!()
                };
                let gain = gain.ok_or(PruneError::MissingGain)?;
                let r = results.pop().expect("right child flattened");
                let l = results.pop().expect("left child flattened");
                out.push(FlatNode {
                    label: label.clone(),
                    criterion: *criterion,
                    gain,
                    left: Some(l),
                    right: Some(r),
                    leaves: out[l].leaves + out[r].leaves,
                });
                results.push(out.len() - 1);
            }
        }
    }
    Ok(out)
}

/// Optimal subtree with at most `k` leaves: keeps the splits retaining the
/// most gain, collapses the rest into leaves, and re-indexes ranks. Trees
/// with at most `k` leaves come back unchanged.
pub fn prune(tree: &LabelTree, k: usize) -> Result<LabelTree, PruneError> {
    if k == 0 {
        return Err(PruneError::ZeroLeafBudget);
    }
    if tree.leaf_count() <= k {
        if tree.recorded_gain_total().is_none() {
            return Err(PruneError::MissingGain);
        }
        return Ok(tree.clone());
    }
    let table = PruneTable::build(tree, k)?;
    let root = table.root();
    let rebuilt = table.rebuild(root, k);
    Ok(LabelTree::assemble(rebuilt).expect("pruning preserves recorded gains"))
}
