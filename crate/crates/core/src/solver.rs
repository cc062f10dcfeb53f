//! Run drivers: qudit local quantum annealing (QdLQA) and qudit gradient
//! descent (QdGD).
//!
//! Both drivers own every piece of mutable state for a run (state, Adam
//! moments, RNG, scratch buffers), so runs can execute concurrently.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{argmax_squared, potts_energy_of, ColorAssignment, CostParams};
use crate::gradient::CostWorkspace;
use crate::graph::{FixStrategy, Graph, GraphError};
use crate::optimizer::Adam;
use crate::state::{
    init_qdgd_state, init_qdlqa_state, spherical_to_amplitudes_into, AngleState, AngularMomentumOps, StateError,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qdlqa,
    Qdgd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Qdlqa => write!(f, "qdlqa"),
            Method::Qdgd => write!(f, "qdgd"),
        }
    }
}

impl FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qdlqa" | "lqa" | "anneal" => Ok(Method::Qdlqa),
            "qdgd" | "gd" => Ok(Method::Qdgd),
            _ => Err(SolverError::InvalidHyperparameter(format!(
                "unknown method `{s}` (expected qdlqa or qdgd)"
            ))),
        }
    }
}

/// Number of Adam steps taken at each annealing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaSchedule {
    Constant(u32),
    /// `min(round(exp(rate * t)), cap)`.
    Exponential { rate: f64, cap: u32 },
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule::Constant(1)
    }
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Constant(a) => write!(f, "{a}"),
            AlphaSchedule::Exponential { rate, cap } => write!(f, "exp:{rate}:{cap}"),
        }
    }
}

impl FromStr for AlphaSchedule {
    type Err = SolverError;

    /// `"3"` or `"exp:<rate>:<cap>"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SolverError::InvalidHyperparameter(format!("cannot parse alpha schedule `{s}`"));
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("exp:") {
            let (rate, cap) = rest.split_once(':').ok_or_else(bad)?;
            Ok(AlphaSchedule::Exponential {
                rate: rate.trim().parse().map_err(|_| bad())?,
                cap: cap.trim().parse().map_err(|_| bad())?,
            })
        } else {
            Ok(AlphaSchedule::Constant(s.parse().map_err(|_| bad())?))
        }
    }
}

pub fn alpha_at(schedule: &AlphaSchedule, t: f64) -> u32 {
    match *schedule {
        AlphaSchedule::Constant(a) => a,
        AlphaSchedule::Exponential { rate, cap } => ((rate * t).exp().round() as u32).clamp(1, cap.max(1)),
    }
}

/// Everything that determines a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub method: Method,
    pub num_colors: usize,
    /// Annealing time steps (QdLQA) or maximum gradient steps (QdGD).
    pub steps: usize,
    pub gamma: f64,
    pub alpha: AlphaSchedule,
    pub eta: f64,
    /// Half-width of the angle noise added to the annealing start.
    pub f: f64,
    /// Sampling scale of the random gradient-descent start.
    pub f_tilde: f64,
    pub h: f64,
    pub runs: usize,
    pub patience: usize,
    pub fix_strategy: FixStrategy,
    pub master_seed: u64,
    /// Also optimize at `t = 1` (the final annealing point).
    pub inclusive_endpoint: bool,
}

impl Hyperparameters {
    /// The common defaults: `eta = 0.5`, `h = 3`, `alpha = 1`, 1000 steps,
    /// `gamma = 1`, `f = 0`, `f_tilde = 1`, patience 100, 100 runs.
    pub fn new(method: Method, num_colors: usize) -> Self {
        Self {
            method,
            num_colors,
            steps: 1000,
            gamma: 1.0,
            alpha: AlphaSchedule::Constant(1),
            eta: 0.5,
            f: 0.0,
            f_tilde: 1.0,
            h: 3.0,
            runs: 100,
            patience: 100,
            fix_strategy: FixStrategy::MaxDegree,
            master_seed: 0,
            inclusive_endpoint: false,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::InvalidHyperparameter(msg));
        let finite_non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if self.num_colors < 2 {
            return fail("colors must be ≥ 2".into());
        }
        if self.steps < 1 {
            return fail("steps must be ≥ 1".into());
        }
        if self.runs < 1 {
            return fail("runs must be ≥ 1".into());
        }
        if !finite_non_negative(self.gamma) {
            return fail(format!("gamma must be ≥ 0, got {}", self.gamma));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return fail(format!("eta must be > 0, got {}", self.eta));
        }
        if !finite_non_negative(self.f) {
            return fail(format!("f must be ≥ 0, got {}", self.f));
        }
        if !(self.f_tilde.is_finite() && self.f_tilde > 0.0) {
            return fail(format!("f_tilde must be > 0, got {}", self.f_tilde));
        }
        if !finite_non_negative(self.h) {
            return fail(format!("h must be ≥ 0, got {}", self.h));
        }
        if self.method == Method::Qdgd && self.patience < 1 {
            return fail("patience must be ≥ 1".into());
        }
        match self.alpha {
            AlphaSchedule::Constant(0) => fail("alpha must be ≥ 1".into()),
            AlphaSchedule::Exponential { rate, cap } if !rate.is_finite() || cap < 1 => {
                fail(format!("invalid exponential alpha schedule exp:{rate}:{cap}"))
            }
            _ => Ok(()),
        }
    }

    fn cost_params(&self, t: f64) -> CostParams {
        CostParams {
            gamma: self.gamma,
            h: self.h,
            t,
        }
    }
}

/// Deterministic per-run seed derived from the master seed (SplitMix64).
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    let mut z = master_seed ^ run_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Outer step index.
    pub step: usize,
    /// Annealing time (QdLQA) or `step / steps` (QdGD).
    pub t: f64,
    /// Cost value at the last gradient evaluation of this step.
    pub total: f64,
    pub potts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub best_energy: usize,
    pub best_coloring: ColorAssignment,
    /// Outer steps executed: time steps for QdLQA, gradient steps for QdGD.
    pub steps_executed: usize,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    #[serde(serialize_with = "serialize_millis")]
    pub wall_time: Duration,
}

fn serialize_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

/// Which run to execute and whether to keep its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSpec {
    pub run_index: usize,
    pub seed: u64,
    pub record_trajectory: bool,
}

impl RunSpec {
    pub fn new(hp: &Hyperparameters, run_index: usize) -> Self {
        Self {
            run_index,
            seed: run_seed(hp.master_seed, run_index as u64),
            record_trajectory: false,
        }
    }

    pub fn with_trajectory(self, record: bool) -> Self {
        Self {
            record_trajectory: record,
            ..self
        }
    }
}

/// Tracks the best coloring seen during a run.
struct BestTracker {
    colors: Vec<u32>,
    best_colors: Vec<u32>,
    best: usize,
    row: Vec<f64>,
}

impl BestTracker {
    fn new(num_nodes: usize, num_colors: usize) -> Self {
        Self {
            colors: vec![0; num_nodes],
            best_colors: vec![0; num_nodes],
            best: usize::MAX,
            row: vec![0.0; num_colors],
        }
    }

    /// Extracts the current coloring; returns its Potts energy and whether
    /// it improved the best.
    fn observe(&mut self, g: &Graph, state: &AngleState) -> (usize, bool) {
        for (node, color) in self.colors.iter_mut().enumerate() {
            *color = match state.angles(node) {
                Some(angles) => {
                    spherical_to_amplitudes_into(angles, &mut self.row);
                    argmax_squared(&self.row)
                }
                None => 0,
            };
        }
        let energy = potts_energy_of(g, &self.colors);
        let improved = energy < self.best;
        if improved {
            self.best = energy;
            self.best_colors.copy_from_slice(&self.colors);
        }
        (energy, improved)
    }

    fn into_coloring(self) -> ColorAssignment {
        ColorAssignment::new(self.best_colors, self.row.len()).expect("argmax is always in range")
    }
}

fn check_method(hp: &Hyperparameters, expected: Method) -> Result<(), SolverError> {
    hp.validate()?;
    if hp.method != expected {
        return Err(SolverError::InvalidHyperparameter(format!(
            "method is {} but the {expected} driver was called",
            hp.method
        )));
    }
    Ok(())
}

/// Local quantum annealing: start in the ground state of `-Lx`, sweep `t`
/// from 0 towards 1 in `1 / steps` increments, take `alpha(t)` Adam steps on
/// the interpolated cost at each time and keep the best extracted coloring.
/// Stops as soon as a proper coloring is found.
pub fn run_qdlqa(g: &Graph, hp: &Hyperparameters, spec: RunSpec) -> Result<RunRecord, SolverError> {
    check_method(hp, Method::Qdlqa)?;
    let start = Instant::now();
    let c = hp.num_colors;
    let ops = AngularMomentumOps::new(c)?;
    let fixed = g.select_fixed_node(hp.fix_strategy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut state = init_qdlqa_state(g, c, hp.f, fixed, &mut rng)?;
    let mut adam = Adam::new(state.params().len(), hp.eta);
    let mut ws = CostWorkspace::new(g, c);
    let mut tracker = BestTracker::new(g.num_nodes(), c);
    let mut trajectory = spec.record_trajectory.then(|| Vec::with_capacity(hp.steps + 1));

    let outer_steps = if hp.inclusive_endpoint { hp.steps + 1 } else { hp.steps };
    let mut executed = 0;
    for step in 0..outer_steps {
        let t = step as f64 / hp.steps as f64;
        let params = hp.cost_params(t);
        let mut total = 0.0;
        for _ in 0..alpha_at(&hp.alpha, t) {
            ws.draw_couplings(hp.h, &mut rng);
            total = ws.evaluate(&state, g, &ops, &params).total;
            adam.step(state.params_mut(), ws.gradient())
                .expect("workspace gradient matches the state layout");
        }
        let (potts, _) = tracker.observe(g, &state);
        executed = step + 1;
        if let Some(points) = trajectory.as_mut() {
            points.push(TrajectoryPoint { step, t, total, potts });
        }
        if tracker.best == 0 {
            break;
        }
    }

    Ok(RunRecord {
        run_index: spec.run_index,
        seed: spec.seed,
        best_energy: tracker.best,
        steps_executed: executed,
        best_coloring: tracker.into_coloring(),
        trajectory,
        wall_time: start.elapsed(),
    })
}

/// Gradient descent on the final cost from a random start, one Adam step
/// per iteration, stopping on a proper coloring or after `patience`
/// consecutive steps without a new best Potts energy.
pub fn run_qdgd(g: &Graph, hp: &Hyperparameters, spec: RunSpec) -> Result<RunRecord, SolverError> {
    check_method(hp, Method::Qdgd)?;
    let start = Instant::now();
    let c = hp.num_colors;
    let ops = AngularMomentumOps::new(c)?;
    let fixed = g.select_fixed_node(hp.fix_strategy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut state = init_qdgd_state(g, c, hp.f_tilde, fixed, &mut rng)?;
    let mut adam = Adam::new(state.params().len(), hp.eta);
    let mut ws = CostWorkspace::new(g, c);
    let mut tracker = BestTracker::new(g.num_nodes(), c);
    let mut trajectory = spec.record_trajectory.then(|| Vec::with_capacity(hp.steps));
    let params = hp.cost_params(1.0);

    let mut executed = 0;
    let mut stale = 0;
    for step in 0..hp.steps {
        ws.draw_couplings(hp.h, &mut rng);
        let total = ws.evaluate(&state, g, &ops, &params).total;
        adam.step(state.params_mut(), ws.gradient())
            .expect("workspace gradient matches the state layout");
        let (potts, improved) = tracker.observe(g, &state);
        executed = step + 1;
        if let Some(points) = trajectory.as_mut() {
            points.push(TrajectoryPoint {
                step,
                t: executed as f64 / hp.steps as f64,
                total,
                potts,
            });
        }
        stale = if improved { 0 } else { stale + 1 };
        if tracker.best == 0 || stale >= hp.patience {
            break;
        }
    }

    Ok(RunRecord {
        run_index: spec.run_index,
        seed: spec.seed,
        best_energy: tracker.best,
        steps_executed: executed,
        best_coloring: tracker.into_coloring(),
        trajectory,
        wall_time: start.elapsed(),
    })
}

/// Dispatches on `hp.method`.
pub fn run(g: &Graph, hp: &Hyperparameters, spec: RunSpec) -> Result<RunRecord, SolverError> {
    match hp.method {
        Method::Qdlqa => run_qdlqa(g, hp, spec),
        Method::Qdgd => run_qdgd(g, hp, spec),
    }
}
