//! Labeled, weighted, directed graphs with dense integer ids.
//!
//! Node and label names are interned to dense ids at construction time so
//! that the splitter can use plain arrays for its per-node counters. Graphs
//! are normalized on build: self-loops are dropped (counted), duplicate
//! directed pairs are merged by summing weights, and all adjacency is kept
//! in sorted order for reproducible iteration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{stream} line {line}: {msg}")]
    Parse {
        stream: &'static str,
        line: usize,
        msg: String,
    },
    #[error("edge weight must be a positive finite number, got {0}")]
    BadWeight(f64),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A directed edge between dense node ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Four-field summary printable as a single JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub labels: usize,
    pub total_weight: f64,
}

/// An immutable parsed graph: nodes, weighted directed edges, per-node label
/// sets, and the label-to-nodes inverse index.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    node_names: Vec<String>,
    node_ids: HashMap<String, usize>,
    label_names: Vec<String>,
    label_ids: HashMap<String, usize>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    node_labels: Vec<Vec<usize>>,
    label_nodes: Vec<Vec<usize>>,
    total_weight: f64,
    self_loops_dropped: usize,
    duplicates_merged: usize,
}

impl LabeledGraph {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label_count(&self) -> usize {
        self.label_names.len()
    }

    /// Sum of all edge weights. This is also the score of the single-leaf
    /// tree, where every edge sits inside one rank.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Normalized edges, sorted by (source, target).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_name(&self, id: usize) -> &str {
        &self.node_names[id]
    }

    pub fn node_id(&self, name: &str) -> Option<usize> {
        self.node_ids.get(name).copied()
    }

    pub fn label_name(&self, id: usize) -> &str {
        &self.label_names[id]
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.label_ids.get(name).copied()
    }

    /// Label ids of a node, sorted ascending.
    pub fn labels_of(&self, node: usize) -> &[usize] {
        &self.node_labels[node]
    }

    pub fn has_label(&self, node: usize, label: usize) -> bool {
        self.node_labels[node].binary_search(&label).is_ok()
    }

    /// Node ids carrying a label, sorted ascending.
    pub fn nodes_with_label(&self, label: usize) -> &[usize] {
        &self.label_nodes[label]
    }

    /// Outgoing (target, weight) pairs, sorted by target.
    pub fn out_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.out_adj[node]
    }

    /// Incoming (source, weight) pairs, sorted by source.
    pub fn in_edges(&self, node: usize) -> &[(usize, f64)] {
        &self.in_adj[node]
    }

    pub fn weighted_out_degree(&self, node: usize) -> f64 {
        self.out_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn weighted_in_degree(&self, node: usize) -> f64 {
        self.in_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn duplicates_merged(&self) -> usize {
        self.duplicates_merged
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            nodes: self.node_count(),
            edges: self.edge_count(),
            labels: self.label_count(),
            total_weight: self.total_weight,
        }
    }

    /// Exactly the edges going from a node of `from` to a node of `to`,
    /// sorted by (source, target).
    pub fn edges_between(&self, from: &[usize], to: &[usize]) -> Result<Vec<Edge>, GraphError> {
        let n = self.node_count();
        for &v in from.iter().chain(to) {
            if v >= n {
                return Err(GraphError::UnknownNode(v));
            }
        }
        let mut in_to = vec![false; n];
        for &v in to {
            in_to[v] = true;
        }
        let mut sources: Vec<usize> = from.to_vec();
        sources.sort_unstable();
        sources.dedup();
        let mut out = Vec::new();
        for u in sources {
            for &(v, w) in &self.out_adj[u] {
                if in_to[v] {
                    out.push(Edge {
                        source: u,
                        target: v,
                        weight: w,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Writes the edge file: one "u\tv\tw" line per edge, sorted by id.
    pub fn write_edges<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(
                w,
                "{}\t{}\t{}",
                self.node_names[e.source],
                self.node_names[e.target],
                fmt_weight(e.weight)
            )?;
        }
        Ok(())
    }

    /// Writes the label file: one line per labeled node ("v\tl1\tl2..."),
    /// plus a bare line for isolated unlabeled nodes so the files round-trip.
    pub fn write_labels<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for v in 0..self.node_count() {
            let labels = &self.node_labels[v];
            if labels.is_empty() {
                if self.out_adj[v].is_empty() && self.in_adj[v].is_empty() {
                    writeln!(w, "{}", self.node_names[v])?;
                }
                continue;
            }
            write!(w, "{}", self.node_names[v])?;
            for &l in labels {
                write!(w, "\t{}", self.label_names[l])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Formats a weight so that integer-valued weights round-trip as integers.
pub(crate) fn fmt_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 9.0e15 {
        format!("{}", w as i64)
    } else {
        format!("{w}")
    }
}

/// Incremental construction of a [`LabeledGraph`] from names.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    node_names: Vec<String>,
    node_ids: HashMap<String, usize>,
    label_names: Vec<String>,
    label_ids: HashMap<String, usize>,
    raw_edges: Vec<(usize, usize, f64)>,
    node_labels: Vec<BTreeSet<usize>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a node name, returning its dense id.
    pub fn add_node(&mut self, name: &str) -> usize {
        if let Some(&id) = self.node_ids.get(name) {
            return id;
        }
        let id = self.node_names.len();
        self.node_names.push(name.to_string());
        self.node_ids.insert(name.to_string(), id);
        self.node_labels.push(BTreeSet::new());
        id
    }

    fn intern_label(&mut self, name: &str) -> usize {
        if let Some(&id) = self.label_ids.get(name) {
            return id;
        }
        let id = self.label_names.len();
        self.label_names.push(name.to_string());
        self.label_ids.insert(name.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, source: &str, target: &str, weight: f64) -> Result<(), GraphError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(GraphError::BadWeight(weight));
        }
        let u = self.add_node(source);
        let v = self.add_node(target);
        self.raw_edges.push((u, v, weight));
        Ok(())
    }

    pub fn add_label(&mut self, node: &str, label: &str) {
        let v = self.add_node(node);
        let l = self.intern_label(label);
        self.node_labels[v].insert(l);
    }

    /// Normalizes and freezes the graph: drops self-loops, merges duplicate
    /// directed pairs by summing weights, and builds sorted adjacency and
    /// the label index.
    pub fn build(self) -> LabeledGraph {
        let n = self.node_names.len();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut self_loops = 0usize;
        let mut duplicates = 0usize;
        for (u, v, w) in self.raw_edges {
            if u == v {
                self_loops += 1;
                continue;
            }
            match merged.entry((u, v)) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    *e.get_mut() += w;
                    duplicates += 1;
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(w);
                }
            }
        }
        let mut edges = Vec::with_capacity(merged.len());
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut total_weight = 0.0;
        for (&(u, v), &w) in &merged {
            edges.push(Edge {
                source: u,
                target: v,
                weight: w,
            });
            out_adj[u].push((v, w));
            in_adj[v].push((u, w));
            total_weight += w;
        }
        let node_labels: Vec<Vec<usize>> = self
            .node_labels
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();
        let mut label_nodes = vec![Vec::new(); self.label_names.len()];
        for (v, labels) in node_labels.iter().enumerate() {
            for &l in labels {
                label_nodes[l].push(v);
            }
        }
        LabeledGraph {
            node_names: self.node_names,
            node_ids: self.node_ids,
            label_names: self.label_names,
            label_ids: self.label_ids,
            edges,
            out_adj,
            in_adj,
            node_labels,
            label_nodes,
            total_weight,
            self_loops_dropped: self_loops,
            duplicates_merged: duplicates,
        }
    }
}

/// Parses an edge stream ("u\tv[\tw]") and a label stream ("v\tl1\tl2...").
///
/// Lines starting with '#' and blank lines are ignored; CRLF is accepted.
/// Nodes appearing only in the label stream are kept with degree zero, and
/// nodes appearing only in edges get an empty label set.
pub fn parse_graph<E: BufRead, L: BufRead>(edges: E, labels: L) -> Result<LabeledGraph, GraphError> {
    let mut b = GraphBuilder::new();
    for (idx, line) in edges.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let lineno = idx + 1;
        if fields.len() < 2 || fields.len() > 3 {
            return Err(GraphError::Parse {
                stream: "edges",
                line: lineno,
                msg: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(GraphError::Parse {
                stream: "edges",
                line: lineno,
                msg: "empty node id".to_string(),
            });
        }
        let weight = if fields.len() == 3 {
            match fields[2].parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => w,
                Ok(w) => {
                    return Err(GraphError::Parse {
                        stream: "edges",
                        line: lineno,
                        msg: format!("weight must be positive, got {w}"),
                    })
                }
                Err(_) => {
                    return Err(GraphError::Parse {
                        stream: "edges",
                        line: lineno,
                        msg: format!("weight is not a number: {:?}", fields[2]),
                    })
                }
            }
        } else {
            1.0
        };
        b.add_edge(fields[0], fields[1], weight)
            .expect("weight already validated");
    }
    for (idx, line) in labels.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = line.split('\t');
        let node = fields.next().unwrap_or("");
        if node.is_empty() {
            return Err(GraphError::Parse {
                stream: "labels",
                line: lineno,
                msg: "empty node id".to_string(),
            });
        }
        b.add_node(node);
        for label in fields {
            if label.is_empty() {
                return Err(GraphError::Parse {
                    stream: "labels",
                    line: lineno,
                    msg: "empty label".to_string(),
                });
            }
            b.add_label(node, label);
        }
    }
    Ok(b.build())
}
