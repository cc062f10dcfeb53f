//! Multi-run batches, summary statistics, chromatic-number sweeps and
//! trajectory averaging.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::solver::{self, Hyperparameters, RunRecord, RunSpec, SolverError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
    #[error("run {run} has no recorded trajectory")]
    MissingTrajectory { run: usize },
    #[error("trajectory of run {run} does not match the grid of run {reference} at position {position}")]
    MismatchedGrid {
        run: usize,
        reference: usize,
        position: usize,
    },
    #[error("no records to summarize")]
    NoRecords,
    #[error("color range must be non-empty and ascending")]
    BadColorRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BatchOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub keep_trajectories: bool,
}

/// Aggregates over the runs of one batch.
#[derive(Debug, Clone, Serialize)]
pub struct BatchStats {
    #[serde(skip)]
    pub records: Vec<RunRecord>,
    pub num_runs: usize,
    pub num_edges: usize,
    pub best_overall: usize,
    /// Runs that reached `best_overall`.
    pub n_min: usize,
    pub p_min: f64,
    pub mean_best: f64,
    /// Population standard deviation of the per-run best energies.
    pub std_best: f64,
    /// Best energy -> number of runs.
    pub histogram: BTreeMap<usize, usize>,
    /// `best_overall / |E|`.
    pub normalized_error: f64,
    pub mean_steps: f64,
}

impl BatchStats {
    pub fn from_records(records: Vec<RunRecord>, num_edges: usize) -> Result<Self, HarnessError> {
        if records.is_empty() {
            return Err(HarnessError::NoRecords);
        }
        let n = records.len() as f64;
        let mut histogram = BTreeMap::new();
        for r in &records {
            *histogram.entry(r.best_energy).or_insert(0) += 1;
        }
        let (&best_overall, &n_min) = histogram.iter().next().expect("non-empty");
        let mean_best = records.iter().map(|r| r.best_energy as f64).sum::<f64>() / n;
        let var = records
            .iter()
            .map(|r| (r.best_energy as f64 - mean_best).powi(2))
            .sum::<f64>()
            / n;
        let mean_steps = records.iter().map(|r| r.steps_executed as f64).sum::<f64>() / n;
        Ok(Self {
            num_runs: records.len(),
            num_edges,
            best_overall,
            n_min,
            p_min: n_min as f64 / n,
            mean_best,
            std_best: var.sqrt(),
            histogram,
            normalized_error: best_overall as f64 / num_edges as f64,
            mean_steps,
            records,
        })
    }

    /// The run that produced `best_overall` with the lowest index.
    pub fn best_record(&self) -> &RunRecord {
        self.records
            .iter()
            .find(|r| r.best_energy == self.best_overall)
            .expect("best_overall comes from a record")
    }

    /// `energy,count` CSV.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("energy,count\n");
        for (energy, count) in &self.histogram {
            let _ = writeln!(out, "{energy},{count}");
        }
        out
    }
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// Runs `hp.runs` independent runs. Results are ordered by run index and do
/// not depend on the worker count.
pub fn run_batch(g: &Graph, hp: &Hyperparameters, opts: BatchOptions) -> Result<BatchStats, HarnessError> {
    hp.validate()?;
    let records = in_pool(opts.workers, || {
        (0..hp.runs)
            .into_par_iter()
            .map(|i| solver::run(g, hp, RunSpec::new(hp, i).with_trajectory(opts.keep_trajectories)))
            .collect::<Result<Vec<_>, _>>()
    })??;
    BatchStats::from_records(records, g.num_edges())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub batches: BTreeMap<usize, BatchStats>,
    /// Smallest color count with a proper coloring in some run.
    pub chromatic_upper: Option<usize>,
}

/// One batch per color count in ascending order. Stops after the first
/// count that produces a proper coloring unless `force_full` is set.
pub fn sweep_colors(
    g: &Graph,
    hp: &Hyperparameters,
    colors: &[usize],
    opts: BatchOptions,
    force_full: bool,
) -> Result<SweepResult, HarnessError> {
    if colors.is_empty() || colors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::BadColorRange);
    }
    let mut batches = BTreeMap::new();
    let mut chromatic_upper = None;
    for &c in colors {
        let hp_c = Hyperparameters {
            num_colors: c,
            ..hp.clone()
        };
        let stats = run_batch(g, &hp_c, opts)?;
        let solved = stats.best_overall == 0;
        batches.insert(c, stats);
        if solved && chromatic_upper.is_none() {
            chromatic_upper = Some(c);
            if !force_full {
                break;
            }
        }
    }
    Ok(SweepResult {
        batches,
        chromatic_upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Total,
    Potts,
}

/// How trajectories of different length are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAlignment {
    /// All trajectories must share the same grid.
    Strict,
    /// Runs that stopped early are extended with their last value.
    HoldLast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub step: usize,
    pub t: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Per-step mean and population standard deviation across runs.
pub fn trajectory_stats(
    records: &[RunRecord],
    quantity: Quantity,
    alignment: GridAlignment,
) -> Result<Vec<TrajectorySummary>, HarnessError> {
    let trajectories = records
        .iter()
        .map(|r| {
            r.trajectory
                .as_deref()
                .ok_or(HarnessError::MissingTrajectory { run: r.run_index })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let Some(reference) = trajectories.iter().copied().max_by_key(|t| t.len()) else {
        return Err(HarnessError::NoRecords);
    };
    let reference_run = records[trajectories.iter().position(|t| t.len() == reference.len()).unwrap()].run_index;

    for (traj, record) in trajectories.iter().zip(records) {
        let mismatch = |position| HarnessError::MismatchedGrid {
            run: record.run_index,
            reference: reference_run,
            position,
        };
        if traj.is_empty() || (alignment == GridAlignment::Strict && traj.len() != reference.len()) {
            return Err(mismatch(traj.len()));
        }
        if let Some(pos) = traj
            .iter()
            .zip(reference)
            .position(|(a, b)| a.step != b.step || a.t != b.t)
        {
            return Err(mismatch(pos));
        }
    }

    let value = |traj: &[solver::TrajectoryPoint], i: usize| {
        let p = &traj[i.min(traj.len() - 1)];
        match quantity {
            Quantity::Total => p.total,
            Quantity::Potts => p.potts as f64,
        }
    };
    let n = trajectories.len() as f64;
    Ok(reference
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let mean = trajectories.iter().map(|t| value(t, i)).sum::<f64>() / n;
            let var = trajectories.iter().map(|t| (value(t, i) - mean).powi(2)).sum::<f64>() / n;
            TrajectorySummary {
                step: point.step,
                t: point.t,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}

/// `step,t,mean,std` CSV.
pub fn trajectory_csv(summary: &[TrajectorySummary]) -> String {
    let mut out = String::from("step,t,mean,std\n");
    for s in summary {
        let _ = writeln!(out, "{},{},{},{}", s.step, s.t, s.mean, s.std);
    }
    out
}
