//! Divide-and-conquer tree construction by repeated best-gain splits.
//!
//! The expensive part of picking a split is knowing what it does to the
//! score without touching the edges. Per leaf we keep three aggregates and
//! per node three counters:
//!
//! * `back`: weight of backward edges jumping over the leaf entirely,
//! * `inback[v]` / `inback_total`: backward weight arriving at `v` from
//!   higher-ranked leaves,
//! * `outback[v]` / `outback_total`: backward weight leaving `v` towards
//!   lower-ranked leaves,
//! * `diff[v]`: backward-incoming minus backward-outgoing weight where
//!   same-leaf edges count on both sides.
//!
//! With these, the score change of splitting a leaf on label `t` is, for
//! criterion true (holders become the new left leaf),
//! `back + outback_total + sum(diff over holders)`, and for criterion false
//! `back + inback_total - sum(diff over holders)` — an `O(holders)` probe.
//! Splitting moves the label holders to a fresh member list, hands the rest
//! the old containers, iterates the cheaper side to fix counters, and
//! consumes the cross edges it visits so no edge is scanned twice from the
//! same side of the recursion.

use std::collections::{BTreeMap, HashMap};

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::tree::{LabelTree, RankAssignment, TreeNode};

#[derive(Debug, Error)]
pub enum GreedyError {
    #[error("arena slot {0} is not a current leaf")]
    NotALeaf(usize),
    #[error("label {0} covers no member or every member of the leaf")]
    DegenerateSplit(usize),
}

/// A scored split proposal: the better orientation for one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub label: usize,
    pub criterion: bool,
    /// Exact score change if performed; negative improves.
    pub gain: f64,
}

/// A performed split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStep {
    pub slot: usize,
    pub left_slot: usize,
    pub right_slot: usize,
    pub label: usize,
    pub criterion: bool,
    pub gain: f64,
}

/// Read-only view of one current leaf, in left-to-right order.
#[derive(Debug)]
pub struct LeafView<'a> {
    pub slot: usize,
    /// 1-based position among current leaves.
    pub rank: usize,
    pub members: &'a [usize],
    pub back: f64,
    pub inback_total: f64,
    pub outback_total: f64,
    pub degree_sum: usize,
}

#[derive(Debug)]
struct LeafData {
    slot: usize,
    members: Vec<usize>,
    labeldic: BTreeMap<usize, IndexSet<usize>>,
    back: f64,
    inback_total: f64,
    outback_total: f64,
    degree_sum: usize,
}

#[derive(Debug, Clone)]
enum ArenaNode {
    Leaf,
    Split {
        label: usize,
        criterion: bool,
        gain: f64,
        left: usize,
        right: usize,
    },
}

/// One in-flight greedy construction over a borrowed graph. Owns all
/// mutable state; a run can be stepped split by split for inspection.
pub struct GreedyRun<'g> {
    graph: &'g LabeledGraph,
    inback: Vec<f64>,
    outback: Vec<f64>,
    diff: Vec<f64>,
    pos_in_leaf: Vec<usize>,
    out_work: Vec<IndexMap<usize, f64>>,
    in_work: Vec<IndexMap<usize, f64>>,
    mark: Vec<u64>,
    stamp: u64,
    arena: Vec<ArenaNode>,
    leaves: HashMap<usize, LeafData>,
    work: Vec<usize>,
}

impl<'g> GreedyRun<'g> {
    /// Sets up the root leaf holding every node: aggregates are zero and
    /// `diff[v]` is the weighted in-degree minus out-degree.
    pub fn new(graph: &'g LabeledGraph) -> GreedyRun<'g> {
        let n = graph.node_count();
        let mut diff = vec![0.0; n];
        let mut out_work = Vec::with_capacity(n);
        let mut in_work = Vec::with_capacity(n);
        let mut degree_sum = 0usize;
        for v in 0..n {
            let out: IndexMap<usize, f64> = graph.out_edges(v).iter().copied().collect();
            let inn: IndexMap<usize, f64> = graph.in_edges(v).iter().copied().collect();
            degree_sum += out.len() + inn.len();
            for (_, w) in &out {
                diff[v] -= w;
            }
            for (_, w) in &inn {
                diff[v] += w;
            }
            out_work.push(out);
            in_work.push(inn);
        }
        let mut labeldic = BTreeMap::new();
        for l in 0..graph.label_count() {
            let nodes = graph.nodes_with_label(l);
            if !nodes.is_empty() {
                labeldic.insert(l, nodes.iter().copied().collect::<IndexSet<usize>>());
            }
        }
        let root = LeafData {
            slot: 0,
            members: (0..n).collect(),
            labeldic,
            back: 0.0,
            inback_total: 0.0,
            outback_total: 0.0,
            degree_sum,
        };
        GreedyRun {
            graph,
            inback: vec![0.0; n],
            outback: vec![0.0; n],
            diff,
            pos_in_leaf: (0..n).collect(),
            out_work,
            in_work,
            mark: vec![0; n],
            stamp: 0,
            arena: vec![ArenaNode::Leaf],
            leaves: HashMap::from([(0, root)]),
            work: vec![0],
        }
    }

    pub fn graph(&self) -> &LabeledGraph {
        self.graph
    }

    pub fn inback_of(&self, node: usize) -> f64 {
        self.inback[node]
    }

    pub fn outback_of(&self, node: usize) -> f64 {
        self.outback[node]
    }

    pub fn diff_of(&self, node: usize) -> f64 {
        self.diff[node]
    }

    /// Gain of splitting the leaf at `slot` on `label`, trying both
    /// criteria and keeping the better; `None` when the label covers no
    /// member or every member.
    pub fn test_split_at(&self, slot: usize, label: usize) -> Option<SplitCandidate> {
        let leaf = self.leaves.get(&slot)?;
        self.test_split(leaf, label)
    }

    fn test_split(&self, leaf: &LeafData, label: usize) -> Option<SplitCandidate> {
        let holders = leaf.labeldic.get(&label)?;
        if holders.is_empty() || holders.len() == leaf.members.len() {
            return None;
        }
        let s: f64 = holders.iter().map(|&v| self.diff[v]).sum();
        let gain_true = leaf.back + leaf.outback_total + s;
        let gain_false = leaf.back + leaf.inback_total - s;
        Some(if gain_true <= gain_false {
            SplitCandidate {
                label,
                criterion: true,
                gain: gain_true,
            }
        } else {
            SplitCandidate {
                label,
                criterion: false,
                gain: gain_false,
            }
        })
    }

    /// Best improving candidate over all labels of the leaf, or `None`.
    /// Ties break towards the smaller label id, then criterion true.
    pub fn best_split_at(&self, slot: usize) -> Option<SplitCandidate> {
        let leaf = self.leaves.get(&slot)?;
        self.best_split(leaf)
    }

    fn best_split(&self, leaf: &LeafData) -> Option<SplitCandidate> {
        let mut best: Option<SplitCandidate> = None;
        for &label in leaf.labeldic.keys() {
            let Some(cand) = self.test_split(leaf, label) else {
                continue;
            };
            // ascending label order: strict improvement keeps the earliest,
            // and test_split already prefers criterion true on equal gain
            if best.as_ref().map_or(true, |b| cand.gain < b.gain) {
                best = Some(cand);
            }
        }
        best.filter(|c| c.gain < 0.0)
    }

    /// Performs a specific split, recording the exact gain of that
    /// orientation. The caller is expected to have checked the gain sign;
    /// degenerate labels are refused.
    pub fn apply_split(
        &mut self,
        slot: usize,
        label: usize,
        criterion: bool,
    ) -> Result<SplitStep, GreedyError> {
        let leaf = self.leaves.get(&slot).ok_or(GreedyError::NotALeaf(slot))?;
        let holders = leaf
            .labeldic
            .get(&label)
            .ok_or(GreedyError::DegenerateSplit(label))?;
        if holders.is_empty() || holders.len() == leaf.members.len() {
            return Err(GreedyError::DegenerateSplit(label));
        }
        let s: f64 = holders.iter().map(|&v| self.diff[v]).sum();
        let gain = if criterion {
            leaf.back + leaf.outback_total + s
        } else {
            leaf.back + leaf.inback_total - s
        };
        let leaf = self.leaves.remove(&slot).expect("checked above");
        let cand = SplitCandidate {
            label,
            criterion,
            gain,
        };
        Ok(self.construct(leaf, cand))
    }

    /// Runs until the next split happens; `None` once no leaf can improve.
    pub fn step(&mut self) -> Option<SplitStep> {
        while let Some(slot) = self.work.pop() {
            // slots split externally may linger on the stack
            let Some(leaf) = self.leaves.remove(&slot) else {
                continue;
            };
            match self.best_split(&leaf) {
                Some(cand) => return Some(self.construct(leaf, cand)),
                None => {
                    self.leaves.insert(slot, leaf);
                }
            }
        }
        None
    }

    /// Drives the run to completion.
    pub fn run(&mut self) {
        while self.step().is_some() {}
    }

    /// Splits a leaf: label holders move to a fresh container, the rest
    /// inherit the old one, and counters are fixed by iterating whichever
    /// side has the smaller `2|V| + degree_sum` (an exact stand-in for
    /// `|V| + |E|`, since cross edges count once on each side). Cross edges
    /// are deleted from the working adjacency as they are consumed.
    fn construct(&mut self, mut leaf: LeafData, cand: SplitCandidate) -> SplitStep {
        let moved_set = leaf
            .labeldic
            .remove(&cand.label)
            .expect("split label has holders");
        let moved: Vec<usize> = moved_set.into_iter().collect();

        self.stamp += 1;
        let stamp = self.stamp;
        for &v in &moved {
            self.mark[v] = stamp;
        }

        // the complement keeps the member container
        let mut container_members = std::mem::take(&mut leaf.members);
        for &v in &moved {
            let p = self.pos_in_leaf[v];
            container_members.swap_remove(p);
            if let Some(&swapped) = container_members.get(p) {
                self.pos_in_leaf[swapped] = p;
            }
        }
        for (i, &v) in moved.iter().enumerate() {
            self.pos_in_leaf[v] = i;
        }

        // the complement keeps the dictionary, minus the moved nodes
        let mut container_dic = std::mem::take(&mut leaf.labeldic);
        let mut moved_dic: BTreeMap<usize, IndexSet<usize>> = BTreeMap::new();
        for &v in &moved {
            for &l in self.graph.labels_of(v) {
                if l != cand.label {
                    if let Some(set) = container_dic.get_mut(&l) {
                        set.swap_remove(&v);
                        if set.is_empty() {
                            container_dic.remove(&l);
                        }
                    }
                }
                moved_dic.entry(l).or_default().insert(v);
            }
        }

        let moved_deg: usize = moved
            .iter()
            .map(|&v| self.out_work[v].len() + self.in_work[v].len())
            .sum();

        let left_slot = self.arena.len();
        self.arena.push(ArenaNode::Leaf);
        let right_slot = self.arena.len();
        self.arena.push(ArenaNode::Leaf);
        self.arena[leaf.slot] = ArenaNode::Split {
            label: cand.label,
            criterion: cand.criterion,
            gain: cand.gain,
            left: left_slot,
            right: right_slot,
        };

        let moved_leaf = LeafData {
            slot: 0,
            members: moved,
            labeldic: moved_dic,
            back: 0.0,
            inback_total: 0.0,
            outback_total: 0.0,
            degree_sum: moved_deg,
        };
        let container_leaf = LeafData {
            slot: 0,
            members: container_members,
            labeldic: container_dic,
            back: 0.0,
            inback_total: 0.0,
            outback_total: 0.0,
            degree_sum: leaf.degree_sum - moved_deg,
        };

        // criterion true routes label holders left
        let (mut beta, mut gamma) = if cand.criterion {
            (moved_leaf, container_leaf)
        } else {
            (container_leaf, moved_leaf)
        };
        beta.slot = left_slot;
        gamma.slot = right_slot;

        let beta_cost = 2 * beta.members.len() + beta.degree_sum;
        let gamma_cost = 2 * gamma.members.len() + gamma.degree_sum;
        let iterate_left = beta_cost <= gamma_cost;

        // aggregate one side from its per-node counters, the other by
        // subtraction, then seed the over-jump weights before any cross
        // edge is accounted
        if iterate_left {
            beta.inback_total = beta.members.iter().map(|&v| self.inback[v]).sum();
            beta.outback_total = beta.members.iter().map(|&v| self.outback[v]).sum();
            gamma.inback_total = leaf.inback_total - beta.inback_total;
            gamma.outback_total = leaf.outback_total - beta.outback_total;
        } else {
            gamma.inback_total = gamma.members.iter().map(|&v| self.inback[v]).sum();
            gamma.outback_total = gamma.members.iter().map(|&v| self.outback[v]).sum();
            beta.inback_total = leaf.inback_total - gamma.inback_total;
            beta.outback_total = leaf.outback_total - gamma.outback_total;
        }
        beta.back = leaf.back + gamma.outback_total;
        gamma.back = leaf.back + beta.inback_total;

        // every remaining working edge of a member stays inside the old
        // leaf, so a neighbor is on the other side exactly when its moved
        // mark disagrees with the iterated side's
        let iterate_is_moved = iterate_left == cand.criterion;
        let side: Vec<usize> = if iterate_left {
            beta.members.clone()
        } else {
            gamma.members.clone()
        };
        let mut crossings = 0usize;
        let mut scratch: Vec<(usize, f64)> = Vec::new();

        for &x in &side {
            scratch.clear();
            for (&z, &w) in &self.out_work[x] {
                if (self.mark[z] == stamp) != iterate_is_moved {
                    scratch.push((z, w));
                }
            }
            for &(z, w) in &scratch {
                self.out_work[x].swap_remove(&z);
                self.in_work[z].swap_remove(&x);
                crossings += 1;
                if iterate_left {
                    // x in the left leaf: the edge x -> z now runs forward
                    self.diff[x] += w;
                    self.diff[z] -= w;
                } else {
                    // x in the right leaf: x -> z is now a backward edge
                    self.outback[x] += w;
                    gamma.outback_total += w;
                    self.inback[z] += w;
                    beta.inback_total += w;
                }
            }
            scratch.clear();
            for (&z, &w) in &self.in_work[x] {
                if (self.mark[z] == stamp) != iterate_is_moved {
                    scratch.push((z, w));
                }
            }
            for &(z, w) in &scratch {
                self.in_work[x].swap_remove(&z);
                self.out_work[z].swap_remove(&x);
                crossings += 1;
                if iterate_left {
                    // z -> x lands in the left leaf from the right: backward
                    self.inback[x] += w;
                    beta.inback_total += w;
                    self.outback[z] += w;
                    gamma.outback_total += w;
                } else {
                    // z -> x runs left to right: forward
                    self.diff[z] += w;
                    self.diff[x] -= w;
                }
            }
        }
        if iterate_left {
            beta.degree_sum -= crossings;
            gamma.degree_sum -= crossings;
        } else {
            gamma.degree_sum -= crossings;
            beta.degree_sum -= crossings;
        }

        let step = SplitStep {
            slot: leaf.slot,
            left_slot,
            right_slot,
            label: cand.label,
            criterion: cand.criterion,
            gain: cand.gain,
        };
        self.leaves.insert(left_slot, beta);
        self.leaves.insert(right_slot, gamma);
        self.work.push(right_slot);
        self.work.push(left_slot);
        step
    }

    fn leaf_slots_in_order(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(slot) = stack.pop() {
            match self.arena[slot] {
                ArenaNode::Leaf => out.push(slot),
                ArenaNode::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Current leaves, left to right.
    pub fn leaves(&self) -> Vec<LeafView<'_>> {
        self.leaf_slots_in_order()
            .into_iter()
            .enumerate()
            .map(|(i, slot)| {
                let leaf = &self.leaves[&slot];
                LeafView {
                    slot,
                    rank: i + 1,
                    members: &leaf.members,
                    back: leaf.back,
                    inback_total: leaf.inback_total,
                    outback_total: leaf.outback_total,
                    degree_sum: leaf.degree_sum,
                }
            })
            .collect()
    }

    /// Member nodes of a current leaf that carry a label, or `None` if the
    /// slot is not a leaf. Nodes come back sorted.
    pub fn leaf_label_members(&self, slot: usize, label: usize) -> Option<Vec<usize>> {
        let leaf = self.leaves.get(&slot)?;
        let mut nodes: Vec<usize> = leaf
            .labeldic
            .get(&label)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        nodes.sort_unstable();
        Some(nodes)
    }

    /// Snapshot of the tree built so far.
    pub fn tree(&self) -> LabelTree {
        let mut built: Vec<Option<TreeNode>> = (0..self.arena.len()).map(|_| None).collect();
        for slot in (0..self.arena.len()).rev() {
            let node = match &self.arena[slot] {
                ArenaNode::Leaf => TreeNode::leaf(),
                ArenaNode::Split {
                    label,
                    criterion,
                    gain,
                    left,
                    right,
                } => TreeNode::Split {
                    label: self.graph.label_name(*label).to_string(),
                    criterion: *criterion,
                    gain: Some(*gain),
                    left: Box::new(built[*left].take().expect("children built first")),
                    right: Box::new(built[*right].take().expect("children built first")),
                },
            };
            built[slot] = Some(node);
        }
        LabelTree::assemble(built[0].take().expect("root built")).expect("greedy gains are negative")
    }

    /// Ranks induced by the current leaves.
    pub fn ranks(&self) -> RankAssignment {
        let mut ranks = vec![0usize; self.graph.node_count()];
        for (i, slot) in self.leaf_slots_in_order().into_iter().enumerate() {
            for &v in &self.leaves[&slot].members {
                ranks[v] = i + 1;
            }
        }
        RankAssignment::new(ranks).expect("every node sits in a leaf")
    }
}

/// Builds a label tree for the graph: starting from one leaf, repeatedly
/// performs the split with the most negative exact score change until no
/// leaf can improve. Deterministic given the graph.
pub fn greedy(graph: &LabeledGraph) -> LabelTree {
    let mut run = GreedyRun::new(graph);
    run.run();
    run.tree()
}
