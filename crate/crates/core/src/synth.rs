//! Planted-hierarchy generator with controllable direction and label noise.
//!
//! Every node draws a uniform rank in `1..=h` and gets that rank's label.
//! A `false_label_frac` share of nodes gains one extra label from the true
//! universe (never one it already has), a `noise_label_frac` share gains one
//! label from a disjoint noise universe. Edges are sampled between adjacent
//! ranks only; a biased coin with probability `forward_prob` points each
//! one down the hierarchy, otherwise up. Duplicate directed pairs merge by
//! weight when the graph is built.
//!
//! Generation is a pure function of the config: the RNG is ChaCha8, seeded
//! from the config's `seed`, so outputs are reproducible across platforms.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphBuilder, LabeledGraph};
use crate::tree::RankAssignment;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("could not populate every rank after {0} attempts; raise nodes or lower ranks")]
    EmptyRank(usize),
}

const RANK_RETRY_LIMIT: usize = 100;

fn default_noise_universe() -> usize {
    100
}

/// Parameters of one synthetic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Node count.
    pub nodes: usize,
    /// Number of sampled node pairs; the built edge count can be smaller
    /// after duplicates merge.
    pub edge_samples: usize,
    /// Number of ranks in the planted hierarchy (at least 2).
    pub ranks: usize,
    /// Probability that a sampled pair points from rank i to rank i+1.
    pub forward_prob: f64,
    /// Fraction of nodes that gain one extra label from the true universe.
    pub false_label_frac: f64,
    /// Fraction of nodes that gain one label from the noise universe.
    pub noise_label_frac: f64,
    #[serde(default = "default_noise_universe")]
    pub noise_universe_size: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |msg: &str| Err(SynthError::InvalidConfig(msg.to_string()));
        if self.ranks < 2 {
            return err("ranks must be at least 2");
        }
        if self.nodes < self.ranks {
            return err("need at least one node per rank");
        }
        if self.edge_samples < 1 {
            return err("edge_samples must be at least 1");
        }
        for (name, p) in [
            ("forward_prob", self.forward_prob),
            ("false_label_frac", self.false_label_frac),
            ("noise_label_frac", self.noise_label_frac),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidConfig(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.noise_universe_size < 1 {
            return err("noise_universe_size must be at least 1");
        }
        Ok(())
    }
}

/// True-universe label of a rank.
pub fn rank_label(rank: usize) -> String {
    format!("L{rank}")
}

fn noise_label(index: usize) -> String {
    format!("N{index}")
}

fn node_name(index: usize) -> String {
    format!("v{}", index + 1)
}

/// Generates the planted instance and its ground-truth ranks.
pub fn generate(cfg: &SynthConfig) -> Result<(LabeledGraph, RankAssignment), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.nodes;
    let h = cfg.ranks;

    // uniform ranks; redraw until every rank is inhabited
    let mut ranks: Vec<usize> = Vec::new();
    let mut ok = false;
    for _ in 0..RANK_RETRY_LIMIT {
        ranks = (0..n).map(|_| rng.random_range(1..=h)).collect();
        let mut seen = vec![false; h + 1];
        for &r in &ranks {
            seen[r] = true;
        }
        if seen[1..].iter().all(|&s| s) {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(SynthError::EmptyRank(RANK_RETRY_LIMIT));
    }

    let mut builder = GraphBuilder::new();
    for (i, &r) in ranks.iter().enumerate() {
        builder.add_label(&node_name(i), &rank_label(r));
    }

    // false labels: another true-universe label, never a repeat
    let false_count = (cfg.false_label_frac * n as f64).floor() as usize;
    for i in rand::seq::index::sample(&mut rng, n, false_count) {
        let pick = rng.random_range(0..h - 1) + 1;
        let label = if pick >= ranks[i] { pick + 1 } else { pick };
        builder.add_label(&node_name(i), &rank_label(label));
    }

    // noise labels come from a disjoint universe
    let noise_count = (cfg.noise_label_frac * n as f64).floor() as usize;
    for i in rand::seq::index::sample(&mut rng, n, noise_count) {
        let label = noise_label(rng.random_range(1..=cfg.noise_universe_size));
        builder.add_label(&node_name(i), &label);
    }

    // adjacent-rank pairs, each oriented by a biased coin
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); h + 1];
    for (i, &r) in ranks.iter().enumerate() {
        members[r].push(i);
    }
    let per_gap = cfg.edge_samples / (h - 1);
    for upper in 1..h {
        let hi = &members[upper];
        let lo = &members[upper + 1];
        for _ in 0..per_gap {
            let a = hi[rng.random_range(0..hi.len())];
            let b = lo[rng.random_range(0..lo.len())];
            let (src, dst) = if rng.random_bool(cfg.forward_prob) {
                (a, b)
            } else {
                (b, a)
            };
            builder
                .add_edge(&node_name(src), &node_name(dst), 1.0)
                .expect("unit weight");
        }
    }

    let graph = builder.build();
    let truth = RankAssignment::new(ranks).expect("ranks start at 1");
    Ok((graph, truth))
}

/// Writes `edges.tsv`, `labels.tsv`, `true_ranks.tsv`, and a `config.json`
/// sidecar into `dir` (created if missing).
pub fn write_dataset(
    dir: &Path,
    cfg: &SynthConfig,
    graph: &LabeledGraph,
    truth: &RankAssignment,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut edges = fs::File::create(dir.join("edges.tsv"))?;
    graph.write_edges(&mut edges)?;
    let mut labels = fs::File::create(dir.join("labels.tsv"))?;
    graph.write_labels(&mut labels)?;
    fs::write(dir.join("true_ranks.tsv"), truth.to_tsv(graph))?;
    let mut config = fs::File::create(dir.join("config.json"))?;
    writeln!(
        config,
        "{}",
        serde_json::to_string_pretty(cfg).expect("config serializes")
    )?;
    Ok(())
}
