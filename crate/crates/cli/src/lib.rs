//! Command implementations behind the `qudit-color` binary.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use qudit_coloring::gradient::{check_gradient, GradientReport};
use qudit_coloring::harness::{trajectory_csv, trajectory_stats, GridAlignment, HarnessError, Quantity};
use qudit_coloring::state::{build_ops, init_qdgd_state};
use qudit_coloring::{
    load_graph, run_batch, sweep_colors, BatchOptions, CostParams, FixStrategy, Graph, GraphError, GraphFormat,
    Hyperparameters,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{load_config, ConfigError, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_CONFIG: i32 = 1;
    pub const IO: i32 = 2;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("failed to write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(e) if e.is_io() => exit::IO,
            CliError::Graph(_) | CliError::Write { .. } => exit::IO,
            _ => exit::INVALID_CONFIG,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

pub fn read_graph(path: &Path, format: Option<GraphFormat>) -> Result<Graph, CliError> {
    Ok(load_graph(path, format)?)
}

/// Runs a batch and writes every requested output.
pub fn solve(cfg: &RunConfig) -> Result<(), CliError> {
    let g = read_graph(&cfg.input, cfg.format)?;
    let hp = &cfg.hyperparameters;
    log::info!(
        "{}: {} nodes, {} edges, {} colors, {} runs",
        cfg.input.display(),
        g.num_nodes(),
        g.num_edges(),
        hp.num_colors,
        hp.runs
    );
    let opts = BatchOptions {
        workers: cfg.workers,
        keep_trajectories: cfg.outputs.trajectory.is_some(),
    };
    let stats = run_batch(&g, hp, opts)?;
    log::info!("best {} in {}/{} runs", stats.best_overall, stats.n_min, stats.num_runs);

    if let Some(path) = &cfg.outputs.trajectory {
        let summary = trajectory_stats(&stats.records, Quantity::Total, GridAlignment::HoldLast)?;
        write_file(path, &trajectory_csv(&summary))?;
    }
    if let Some(path) = &cfg.outputs.histogram {
        write_file(path, &stats.histogram_csv())?;
    }
    if let Some(path) = &cfg.outputs.coloring {
        write_file(path, &output::coloring_text(&g, &stats.best_record().best_coloring))?;
    }
    let report = output::BatchReport::new(hp, &g, &stats, !cfg.no_timing);
    emit(cfg.outputs.stats.as_deref(), &to_json(&report))
}

/// Batches over an ascending color range; reports the smallest color count
/// with a proper coloring.
pub fn sweep(cfg: &RunConfig, colors: &[usize], force_full: bool) -> Result<(), CliError> {
    let g = read_graph(&cfg.input, cfg.format)?;
    let hp = &cfg.hyperparameters;
    for &c in colors {
        Hyperparameters {
            num_colors: c,
            ..hp.clone()
        }
        .validate()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let opts = BatchOptions {
        workers: cfg.workers,
        keep_trajectories: false,
    };
    let result = sweep_colors(&g, hp, colors, opts, force_full)?;
    match result.chromatic_upper {
        Some(c) => log::info!("proper coloring found with {c} colors"),
        None => log::info!("no proper coloring in the range"),
    }
    let configs: BTreeMap<usize, Hyperparameters> = result
        .batches
        .keys()
        .map(|&c| {
            (
                c,
                Hyperparameters {
                    num_colors: c,
                    ..hp.clone()
                },
            )
        })
        .collect();
    let report = output::SweepReport::new(&configs, &g, &result, !cfg.no_timing);
    emit(cfg.outputs.stats.as_deref(), &to_json(&report))
}

#[derive(Debug, Clone)]
pub struct GradcheckOptions {
    pub num_colors: usize,
    pub points: usize,
    pub step: f64,
    pub tolerance: f64,
    pub gamma: f64,
    pub h: f64,
    pub seed: u64,
    pub fix_strategy: FixStrategy,
}

#[derive(Debug, serde::Serialize)]
pub struct GradcheckSummary {
    pub points: usize,
    pub max_rel_error: f64,
    pub clamp_affected: usize,
    pub passed: bool,
    pub reports: Vec<GradientReport>,
}

/// Central-difference checks at random states and random `t`.
pub fn gradcheck_graph(g: &Graph, opts: &GradcheckOptions) -> Result<GradcheckSummary, CliError> {
    if opts.num_colors < 2 {
        return Err(CliError::Invalid("colors must be ≥ 2".into()));
    }
    let fixed = g.select_fixed_node(opts.fix_strategy)?;
    let ops = build_ops(opts.num_colors).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut reports = Vec::with_capacity(opts.points);
    for _ in 0..opts.points {
        let state = init_qdgd_state(g, opts.num_colors, 1.0, fixed, &mut rng)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let t: f64 = rng.random();
        let params = CostParams::new(opts.gamma, opts.h, t).map_err(|e| CliError::Invalid(e.to_string()))?;
        reports.push(check_gradient(&state, g, &ops, &params, opts.step, opts.tolerance, &mut rng));
    }
    Ok(GradcheckSummary {
        points: reports.len(),
        max_rel_error: reports.iter().map(|r| r.max_rel_error).fold(0.0, f64::max),
        clamp_affected: reports.iter().map(|r| r.clamp_affected).sum(),
        passed: reports.iter().all(|r| r.passed),
        reports,
    })
}

pub fn gradcheck(
    input: &Path,
    format: Option<GraphFormat>,
    opts: &GradcheckOptions,
    output: Option<&Path>,
) -> Result<bool, CliError> {
    let g = read_graph(input, format)?;
    let summary = gradcheck_graph(&g, opts)?;
    log::info!(
        "max relative error {:.3e} over {} points ({} clamp-affected components)",
        summary.max_rel_error,
        summary.points,
        summary.clamp_affected
    );
    match output {
        Some(p) => write_file(p, &to_json(&summary))?,
        None => println!(
            "max_rel_error {:e}\nclamp_affected {}\n{}",
            summary.max_rel_error,
            summary.clamp_affected,
            if summary.passed { "PASS" } else { "FAIL" }
        ),
    }
    Ok(summary.passed)
}

pub fn info(input: &Path, format: Option<GraphFormat>) -> Result<String, CliError> {
    let g = read_graph(input, format)?;
    Ok(output::info_text(&g))
}
