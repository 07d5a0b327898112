//! Label trees, rank assignment by traversal, and the naive agony scorer.
//!
//! These are the reference semantics: everything the fast splitter maintains
//! incrementally is checked against scoring done here from first principles.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LabeledGraph;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("invalid tree json: {0}")]
    Json(String),
    #[error("leaf ranks must read 1..{expected} left to right; found {found} at leaf {position}")]
    BadLeafRanks {
        expected: usize,
        found: usize,
        position: usize,
    },
    #[error("recorded gain must be a finite number <= 0, got {0}")]
    BadGain(f64),
    #[error("rank assignment covers {got} nodes, graph has {expected}")]
    RankCountMismatch { expected: usize, got: usize },
    #[error("ranks must be positive integers, got {0}")]
    BadRank(usize),
    #[error("ranks line {line}: {msg}")]
    RankParse { line: usize, msg: String },
    #[error("node {0} has no rank")]
    MissingRank(String),
}

/// Penalty of an edge whose endpoint ranks differ by `rank_delta`
/// (source rank minus target rank): `max(0, rank_delta + 1)`.
///
/// Forward edges (negative delta) cost nothing; a same-rank edge costs 1,
/// and each extra tier jumped backwards adds 1 more.
pub fn penalty(rank_delta: i64) -> f64 {
    (rank_delta + 1).max(0) as f64
}

/// One node of a label tree. Internal nodes route by label membership:
/// a node whose label set contains `label` goes left exactly when
/// `criterion` is true. Leaves carry 1-based ranks in left-to-right order.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        rank: usize,
    },
    Split {
        label: String,
        criterion: bool,
        gain: Option<f64>,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf() -> TreeNode {
        TreeNode::Leaf { rank: 0 }
    }

    pub fn split(
        label: impl Into<String>,
        criterion: bool,
        gain: Option<f64>,
        left: TreeNode,
        right: TreeNode,
    ) -> TreeNode {
        TreeNode::Split {
            label: label.into(),
            criterion,
            gain,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// An ordered full binary tree over labels; leaves are ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTree {
    root: TreeNode,
    leaf_count: usize,
}

/// Flattened node used for fast traversal against one particular graph.
enum Flat {
    Leaf(usize),
    Split {
        label: Option<usize>,
        criterion: bool,
        left: usize,
        right: usize,
    },
}

impl LabelTree {
    /// The one-leaf tree that puts every node at rank 1.
    pub fn single_leaf() -> LabelTree {
        LabelTree {
            root: TreeNode::Leaf { rank: 1 },
            leaf_count: 1,
        }
    }

    /// Builds a tree from a root node, assigning leaf ranks 1..L left to
    /// right (any ranks already present are overwritten). Gains, when
    /// recorded, must be finite and non-positive.
    pub fn assemble(mut root: TreeNode) -> Result<LabelTree, TreeError> {
        let mut next = 0usize;
        assign_leaf_ranks(&mut root, &mut next)?;
        Ok(LabelTree {
            root,
            leaf_count: next,
        })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Height in edges; the single leaf has depth 0.
    pub fn depth(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    /// Sum of recorded gains over internal nodes; `None` if any is missing.
    pub fn recorded_gain_total(&self) -> Option<f64> {
        fn go(n: &TreeNode) -> Option<f64> {
            match n {
                TreeNode::Leaf { .. } => Some(0.0),
                TreeNode::Split {
                    gain, left, right, ..
                } => Some(gain.as_ref()? + go(left)? + go(right)?),
            }
        }
        go(&self.root)
    }

    /// Rank reached by traversing with a label-membership predicate.
    pub fn rank_of(&self, has_label: impl Fn(&str) -> bool) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { rank } => return *rank,
                TreeNode::Split {
                    label,
                    criterion,
                    left,
                    right,
                    ..
                } => {
                    node = if has_label(label) == *criterion {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    fn flatten_for(&self, g: &LabeledGraph) -> Vec<Flat> {
        let mut out = Vec::new();
        fn go(n: &TreeNode, g: &LabeledGraph, out: &mut Vec<Flat>) -> usize {
            match n {
                TreeNode::Leaf { rank } => {
                    out.push(Flat::Leaf(*rank));
                    out.len() - 1
                }
                TreeNode::Split {
                    label,
                    criterion,
                    left,
                    right,
                    ..
                } => {
                    let slot = out.len();
                    out.push(Flat::Leaf(0)); // placeholder
                    let li = go(left, g, out);
                    let ri = go(right, g, out);
                    out[slot] = Flat::Split {
                        label: g.label_id(label),
                        criterion: *criterion,
                        left: li,
                        right: ri,
                    };
                    slot
                }
            }
        }
        go(&self.root, g, &mut out);
        out
    }

    /// Applies [`LabelTree::rank_of`] to every node of the graph. Labels in
    /// the tree that the graph does not know simply never match.
    pub fn assign_ranks(&self, g: &LabeledGraph) -> RankAssignment {
        let flat = self.flatten_for(g);
        let ranks = (0..g.node_count())
            .map(|v| {
                let mut i = 0usize;
                loop {
                    match flat[i] {
                        Flat::Leaf(rank) => return rank,
                        Flat::Split {
                            label,
                            criterion,
                            left,
                            right,
                        } => {
                            let has = label.map_or(false, |l| g.has_label(v, l));
                            i = if has == criterion { left } else { right };
                        }
                    }
                }
            })
            .collect();
        RankAssignment { ranks }
    }

    /// The agony score of the graph under this tree.
    pub fn score(&self, g: &LabeledGraph) -> f64 {
        let ranks = self.assign_ranks(g);
        score_ranks(&ranks, g).expect("assignment covers every node")
    }

    /// Canonical nested JSON form.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&to_dto(&self.root)).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<LabelTree, TreeError> {
        let dto: TreeDto = serde_json::from_str(text).map_err(|e| TreeError::Json(e.to_string()))?;
        let root = from_dto(dto)?;
        let mut expected = 1usize;
        let mut leaves = 0usize;
        check_leaf_ranks(&root, &mut expected, &mut leaves)?;
        Ok(LabelTree {
            root,
            leaf_count: leaves,
        })
    }

    /// GraphViz rendering. The solid branch is the one taken by nodes that
    /// carry the split label; the dashed branch is the other one.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph labeltree {\n");
        let mut next = 0usize;
        fn esc(s: &str) -> String {
            s.replace('\\', "\\\\").replace('"', "\\\"")
        }
        fn go(n: &TreeNode, next: &mut usize, out: &mut String) -> usize {
            let id = *next;
            *next += 1;
            match n {
                TreeNode::Leaf { rank } => {
                    out.push_str(&format!("  n{id} [shape=ellipse, label=\"r = {rank}\"];\n"));
                }
                TreeNode::Split {
                    label,
                    criterion,
                    left,
                    right,
                    ..
                } => {
                    out.push_str(&format!("  n{id} [shape=box, label=\"{}\"];\n", esc(label)));
                    let l = go(left, next, out);
                    let r = go(right, next, out);
                    let (lstyle, rstyle) = if *criterion {
                        ("solid", "dashed")
                    } else {
                        ("dashed", "solid")
                    };
                    out.push_str(&format!("  n{id} -> n{l} [style={lstyle}];\n"));
                    out.push_str(&format!("  n{id} -> n{r} [style={rstyle}];\n"));
                }
            }
            id
        }
        go(&self.root, &mut next, &mut out);
        out.push_str("}\n");
        out
    }
}

fn assign_leaf_ranks(node: &mut TreeNode, next: &mut usize) -> Result<(), TreeError> {
    match node {
        TreeNode::Leaf { rank } => {
            *next += 1;
            *rank = *next;
            Ok(())
        }
        TreeNode::Split {
            gain, left, right, ..
        } => {
            if let Some(g) = gain {
                if !(g.is_finite() && *g <= 0.0) {
                    return Err(TreeError::BadGain(*g));
                }
            }
            assign_leaf_ranks(left, next)?;
            assign_leaf_ranks(right, next)
        }
    }
}

fn check_leaf_ranks(node: &TreeNode, expected: &mut usize, leaves: &mut usize) -> Result<(), TreeError> {
    match node {
        TreeNode::Leaf { rank } => {
            if *rank != *expected {
                return Err(TreeError::BadLeafRanks {
                    expected: *expected,
                    found: *rank,
                    position: *leaves,
                });
            }
            *expected += 1;
            *leaves += 1;
            Ok(())
        }
        TreeNode::Split {
            gain, left, right, ..
        } => {
            if let Some(g) = gain {
                if !(g.is_finite() && *g <= 0.0) {
                    return Err(TreeError::BadGain(*g));
                }
            }
            check_leaf_ranks(left, expected, leaves)?;
            check_leaf_ranks(right, expected, leaves)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TreeDto {
    Split {
        label: String,
        criterion: bool,
        left: Box<TreeDto>,
        right: Box<TreeDto>,
        #[serde(skip_serializing_if = "Option::is_none")]
        gain: Option<f64>,
    },
    Leaf {
        rank: usize,
    },
}

fn to_dto(node: &TreeNode) -> TreeDto {
    match node {
        TreeNode::Leaf { rank } => TreeDto::Leaf { rank: *rank },
        TreeNode::Split {
            label,
            criterion,
            gain,
            left,
            right,
        } => TreeDto::Split {
            label: label.clone(),
            criterion: *criterion,
            left: Box::new(to_dto(left)),
            right: Box::new(to_dto(right)),
            gain: *gain,
        },
    }
}

fn from_dto(dto: TreeDto) -> Result<TreeNode, TreeError> {
    Ok(match dto {
        TreeDto::Leaf { rank } => TreeNode::Leaf { rank },
        TreeDto::Split {
            label,
            criterion,
            left,
            right,
            gain,
        } => TreeNode::Split {
            label,
            criterion,
            gain,
            left: Box::new(from_dto(*left)?),
            right: Box::new(from_dto(*right)?),
        },
    })
}

/// A total map from graph nodes to positive ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankAssignment {
    ranks: Vec<usize>,
}

impl RankAssignment {
    pub fn new(ranks: Vec<usize>) -> Result<RankAssignment, TreeError> {
        if let Some(&bad) = ranks.iter().find(|&&r| r == 0) {
            return Err(TreeError::BadRank(bad));
        }
        Ok(RankAssignment { ranks })
    }

    pub fn rank(&self, node: usize) -> usize {
        self.ranks[node]
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ranks
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// "node<TAB>rank" lines, one per node in id order.
    pub fn to_tsv(&self, g: &LabeledGraph) -> String {
        let mut out = String::new();
        for (v, r) in self.ranks.iter().enumerate() {
            out.push_str(g.node_name(v));
            out.push('\t');
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    /// Builds an assignment for `g` from named ranks; every node of the
    /// graph must be covered.
    pub fn from_named(g: &LabeledGraph, named: &BTreeMap<String, usize>) -> Result<RankAssignment, TreeError> {
        let mut ranks = Vec::with_capacity(g.node_count());
        for v in 0..g.node_count() {
            match named.get(g.node_name(v)) {
                Some(&r) if r > 0 => ranks.push(r),
                Some(&r) => return Err(TreeError::BadRank(r)),
                None => return Err(TreeError::MissingRank(g.node_name(v).to_string())),
            }
        }
        Ok(RankAssignment { ranks })
    }
}

/// Parses a "node<TAB>rank" stream into a name-keyed map.
pub fn parse_rank_tsv<R: BufRead>(reader: R) -> Result<BTreeMap<String, usize>, TreeError> {
    let mut out = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TreeError::RankParse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = line.split('\t');
        let (Some(name), Some(rank), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(TreeError::RankParse {
                line: lineno,
                msg: "expected exactly 2 tab-separated fields".to_string(),
            });
        };
        let rank: usize = rank.parse().map_err(|_| TreeError::RankParse {
            line: lineno,
            msg: format!("rank is not a positive integer: {rank:?}"),
        })?;
        if rank == 0 || name.is_empty() {
            return Err(TreeError::RankParse {
                line: lineno,
                msg: "ranks are 1-based and node ids non-empty".to_string(),
            });
        }
        if out.insert(name.to_string(), rank).is_some() {
            return Err(TreeError::RankParse {
                line: lineno,
                msg: format!("duplicate node {name:?}"),
            });
        }
    }
    Ok(out)
}

/// Agony of a graph under an explicit rank assignment:
/// sum of `w(e) * penalty(r(u) - r(v))` over all edges.
pub fn score_ranks(ranks: &RankAssignment, g: &LabeledGraph) -> Result<f64, TreeError> {
    if ranks.len() != g.node_count() {
        return Err(TreeError::RankCountMismatch {
            expected: g.node_count(),
            got: ranks.len(),
        });
    }
    Ok(g.edges()
        .iter()
        .map(|e| e.weight * penalty(ranks.rank(e.source) as i64 - ranks.rank(e.target) as i64))
        .sum())
}
