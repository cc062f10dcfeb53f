//! Result files: JSON statistics, coloring listings and CSV summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qudit_coloring::{BatchStats, ColorAssignment, Graph, Hyperparameters, SweepResult};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        Self {
            nodes: g.num_nodes(),
            edges: g.num_edges(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PerRun {
    pub seed: u64,
    pub best: usize,
    pub steps: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct BatchReport<'a> {
    pub config: &'a Hyperparameters,
    pub graph: GraphSummary,
    pub best_energy: usize,
    pub n_min: usize,
    pub p_min: f64,
    pub mean_best: f64,
    pub std_best: f64,
    pub std_convention: &'static str,
    pub histogram: &'a BTreeMap<usize, usize>,
    pub normalized_error: f64,
    pub mean_steps: f64,
    pub per_run: Vec<PerRun>,
}

impl<'a> BatchReport<'a> {
    pub fn new(config: &'a Hyperparameters, g: &Graph, stats: &'a BatchStats, timing: bool) -> Self {
        Self {
            config,
            graph: GraphSummary::of(g),
            best_energy: stats.best_overall,
            n_min: stats.n_min,
            p_min: stats.p_min,
            mean_best: stats.mean_best,
            std_best: stats.std_best,
            std_convention: "population",
            histogram: &stats.histogram,
            normalized_error: stats.normalized_error,
            mean_steps: stats.mean_steps,
            per_run: stats
                .records
                .iter()
                .map(|r| PerRun {
                    seed: r.seed,
                    best: r.best_energy,
                    steps: r.steps_executed,
                    wall_ms: if timing { r.wall_time.as_secs_f64() * 1e3 } else { 0.0 },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepReport<'a> {
    pub chromatic_upper: Option<usize>,
    pub batches: BTreeMap<usize, BatchReport<'a>>,
}

impl<'a> SweepReport<'a> {
    pub fn new(configs: &'a BTreeMap<usize, Hyperparameters>, g: &Graph, sweep: &'a SweepResult, timing: bool) -> Self {
        Self {
            chromatic_upper: sweep.chromatic_upper,
            batches: sweep
                .batches
                .iter()
                .map(|(&c, stats)| (c, BatchReport::new(&configs[&c], g, stats, timing)))
                .collect(),
        }
    }
}

/// One `node color` line per node, nodes by their original labels.
pub fn coloring_text(g: &Graph, coloring: &ColorAssignment) -> String {
    let mut out = String::new();
    for (node, color) in coloring.colors().iter().enumerate() {
        let _ = writeln!(out, "{} {}", g.original_id(node), color);
    }
    out
}

/// Human-readable graph summary printed by `info`.
pub fn info_text(g: &Graph) -> String {
    format!(
        "{} nodes, {} edges\ndensity {:.6}\nmax degree {} (node {})\n",
        g.num_nodes(),
        g.num_edges(),
        g.density(),
        g.max_degree(),
        g.original_id(g.j_max()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coloring_uses_original_labels() {
        let g = Graph::from_edges([(10, 20), (20, 30)]).unwrap();
        let coloring = ColorAssignment::new(vec![0, 1, 0], 2).unwrap();
        assert_eq!(coloring_text(&g, &coloring), "10 0\n20 1\n30 0\n");
    }

    #[test]
    fn info_counts() {
        let g = Graph::from_edges([(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(info_text(&g).starts_with("3 nodes, 3 edges\n"));
    }
}
