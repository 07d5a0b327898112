//! Command-line front end: rank graphs into tiers, score externally
//! supplied trees, generate planted benchmarks, compare rankings, and build
//! label quotients. Reports go to stdout as single-line JSON (`--pretty`
//! for the indented form); all file outputs are deterministic given the
//! inputs and flags.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use tiertree::{
    collapse_by_label, generate, kendall_tau_named, parse_graph, prune, write_dataset, GreedyRun,
    LabelTree, LabeledGraph, SynthConfig,
};

#[derive(Parser)]
#[command(name = "tiertree", version, about = "Tiered ranking of labeled directed graphs")]
struct Cli {
    /// Indent JSON reports.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a label tree for a graph and export tree, ranks, and
    /// optionally a DOT rendering.
    Rank {
        /// Edge file: "u<TAB>v[<TAB>w]" per line.
        edges: PathBuf,
        /// Label file: "v<TAB>l1<TAB>l2..." per line.
        labels: PathBuf,
        /// Prune the result to at most this many leaves (ranks).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_leaves: Option<u64>,
        /// Where to write the tree as JSON.
        #[arg(long)]
        tree_out: PathBuf,
        /// Where to write "node<TAB>rank" lines.
        #[arg(long)]
        ranks_out: PathBuf,
        /// Optional GraphViz output.
        #[arg(long)]
        dot_out: Option<PathBuf>,
    },
    /// Score an externally supplied tree against a graph.
    Score {
        edges: PathBuf,
        labels: PathBuf,
        /// Tree in the JSON format written by `rank`.
        tree: PathBuf,
    },
    /// Generate a planted-hierarchy dataset into a directory.
    Generate {
        out_dir: PathBuf,
        /// Read the full config from a JSON file instead of flags.
        #[arg(long, conflicts_with_all = ["nodes", "edges", "ranks", "eta", "theta", "mu", "noise_universe", "seed"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        nodes: Option<usize>,
        /// Number of sampled node pairs.
        #[arg(long, required_unless_present = "config")]
        edges: Option<usize>,
        /// Number of planted ranks.
        #[arg(long, required_unless_present = "config")]
        ranks: Option<usize>,
        /// Forward-edge probability.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Fraction of nodes with one extra true-universe label.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Fraction of nodes with one noise label.
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 100)]
        noise_universe: usize,
        #[arg(long, required_unless_present = "config")]
        seed: Option<u64>,
    },
    /// Kendall tau-b between two "node<TAB>rank" files.
    Eval {
        ranks_a: PathBuf,
        ranks_b: PathBuf,
    },
    /// Quotient a single-label graph: one node per label, weights merged.
    Collapse {
        edges: PathBuf,
        labels: PathBuf,
        /// Output files are written as <prefix>_edges.tsv / <prefix>_labels.tsv.
        out_prefix: String,
    },
}

#[derive(Serialize)]
struct RunReport<'a> {
    nodes: usize,
    edges: usize,
    labels: usize,
    total_weight: f64,
    score: f64,
    leaf_count: usize,
    depth: usize,
    elapsed_ms: u64,
    max_leaves: Option<u64>,
    tree_out: &'a Path,
    ranks_out: &'a Path,
    dot_out: Option<&'a Path>,
}

fn load_graph(edges: &Path, labels: &Path) -> Result<LabeledGraph> {
    let e = File::open(edges).with_context(|| format!("opening {}", edges.display()))?;
    let l = File::open(labels).with_context(|| format!("opening {}", labels.display()))?;
    parse_graph(BufReader::new(e), BufReader::new(l)).context("parsing graph")
}

fn print_report<T: Serialize>(report: &T, pretty: bool) -> Result<()> {
    let text = if pretty {
        serde_json::to_string_pretty(report)?
    } else {
        serde_json::to_string(report)?
    };
    println!("{text}");
    Ok(())
}

fn cmd_rank(
    pretty: bool,
    edges: &Path,
    labels: &Path,
    max_leaves: Option<u64>,
    tree_out: &Path,
    ranks_out: &Path,
    dot_out: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    let graph = load_graph(edges, labels)?;
    let mut run = GreedyRun::new(&graph);
    run.run();
    let mut tree = run.tree();
    if let Some(k) = max_leaves {
        tree = prune(&tree, k as usize).context("pruning")?;
    }
    let ranks = tree.assign_ranks(&graph);

    let claimed = graph.total_weight()
        + tree
            .recorded_gain_total()
            .expect("greedy records a gain on every split");
    let score = tree.score(&graph);
    let tolerance = 1e-9 * graph.total_weight().max(1.0);
    if (claimed - score).abs() > tolerance {
        bail!("internal score check failed: recorded gains give {claimed}, rescoring gives {score}");
    }

    std::fs::write(tree_out, tree.to_json()).with_context(|| format!("writing {}", tree_out.display()))?;
    std::fs::write(ranks_out, ranks.to_tsv(&graph))
        .with_context(|| format!("writing {}", ranks_out.display()))?;
    if let Some(path) = dot_out {
        std::fs::write(path, tree.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }

    let summary = graph.summary();
    print_report(
        &RunReport {
            nodes: summary.nodes,
            edges: summary.edges,
            labels: summary.labels,
            total_weight: summary.total_weight,
            score,
            leaf_count: tree.leaf_count(),
            depth: tree.depth(),
            elapsed_ms: started.elapsed().as_millis() as u64,
            max_leaves,
            tree_out,
            ranks_out,
            dot_out,
        },
        pretty,
    )
}

fn cmd_score(pretty: bool, edges: &Path, labels: &Path, tree: &Path) -> Result<()> {
    let graph = load_graph(edges, labels)?;
    let text = std::fs::read_to_string(tree).with_context(|| format!("reading {}", tree.display()))?;
    let tree = LabelTree::from_json(&text).context("parsing tree")?;
    #[derive(Serialize)]
    struct ScoreReport {
        score: f64,
        leaf_count: usize,
    }
    print_report(
        &ScoreReport {
            score: tree.score(&graph),
            leaf_count: tree.leaf_count(),
        },
        pretty,
    )
}

fn cmd_generate(pretty: bool, out_dir: &Path, cfg: SynthConfig) -> Result<()> {
    let (graph, truth) = generate(&cfg).context("generating")?;
    write_dataset(out_dir, &cfg, &graph, &truth)
        .with_context(|| format!("writing dataset to {}", out_dir.display()))?;
    #[derive(Serialize)]
    struct GenerateReport<'a> {
        out_dir: &'a Path,
        nodes: usize,
        sampled_pairs: usize,
        edges: usize,
        labels: usize,
        total_weight: f64,
        config: &'a SynthConfig,
    }
    let summary = graph.summary();
    print_report(
        &GenerateReport {
            out_dir,
            nodes: summary.nodes,
            sampled_pairs: cfg.edge_samples,
            edges: summary.edges,
            labels: summary.labels,
            total_weight: summary.total_weight,
            config: &cfg,
        },
        pretty,
    )
}

fn cmd_eval(pretty: bool, ranks_a: &Path, ranks_b: &Path) -> Result<()> {
    let read = |path: &Path| -> Result<_> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        tiertree::tree::parse_rank_tsv(BufReader::new(file))
            .with_context(|| format!("parsing {}", path.display()))
    };
    let a = read(ranks_a)?;
    let b = read(ranks_b)?;
    let result = kendall_tau_named(&a, &b)?;
    print_report(&result, pretty)
}

fn cmd_collapse(pretty: bool, edges: &Path, labels: &Path, out_prefix: &str) -> Result<()> {
    let graph = load_graph(edges, labels)?;
    let collapsed = collapse_by_label(&graph)?;
    let edges_path = PathBuf::from(format!("{out_prefix}_edges.tsv"));
    let labels_path = PathBuf::from(format!("{out_prefix}_labels.tsv"));
    let mut e = File::create(&edges_path).with_context(|| format!("writing {}", edges_path.display()))?;
    collapsed.write_edges(&mut e)?;
    e.flush()?;
    let mut l = File::create(&labels_path).with_context(|| format!("writing {}", labels_path.display()))?;
    collapsed.write_labels(&mut l)?;
    l.flush()?;
    #[derive(Serialize)]
    struct CollapseReport<'a> {
        edges_out: &'a Path,
        labels_out: &'a Path,
        nodes: usize,
        edges: usize,
        total_weight: f64,
    }
    let summary = collapsed.summary();
    print_report(
        &CollapseReport {
            edges_out: &edges_path,
            labels_out: &labels_path,
            nodes: summary.nodes,
            edges: summary.edges,
            total_weight: summary.total_weight,
        },
        pretty,
    )
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rank {
            ref edges,
            ref labels,
            max_leaves,
            ref tree_out,
            ref ranks_out,
            ref dot_out,
        } => cmd_rank(
            cli.pretty,
            edges,
            labels,
            max_leaves,
            tree_out,
            ranks_out,
            dot_out.as_deref(),
        ),
        Command::Score {
            ref edges,
            ref labels,
            ref tree,
        } => cmd_score(cli.pretty, edges, labels, tree),
        Command::Generate {
            ref out_dir,
            ref config,
            nodes,
            edges,
            ranks,
            eta,
            theta,
            mu,
            noise_universe,
            seed,
        } => {
            let cfg = match config {
                Some(path) => std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .and_then(|text| serde_json::from_str(&text).context("parsing config")),
                None => Ok(SynthConfig {
                    nodes: nodes.expect("required by clap"),
                    edge_samples: edges.expect("required by clap"),
                    ranks: ranks.expect("required by clap"),
                    forward_prob: eta,
                    false_label_frac: theta,
                    noise_label_frac: mu,
                    noise_universe_size: noise_universe,
                    seed: seed.expect("required by clap"),
                }),
            };
            cfg.and_then(|cfg| cmd_generate(cli.pretty, out_dir, cfg))
        }
        Command::Eval {
            ref ranks_a,
            ref ranks_b,
        } => cmd_eval(cli.pretty, ranks_a, ranks_b),
        Command::Collapse {
            ref edges,
            ref labels,
            ref out_prefix,
        } => cmd_collapse(cli.pretty, edges, labels, out_prefix),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
