//! Cost functions over product states and the classical Potts energy.
//!
//! These are straightforward reference implementations. The optimizer hot
//! loop evaluates the same quantities together with their gradient in
//! [`crate::gradient::CostWorkspace`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::state::{AngleState, AngularMomentumOps};

/// Probabilities are clamped to this before taking a logarithm in gradients.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("color {color} at node {node} is outside 0..{num_colors}")]
    ColorOutOfRange {
        node: usize,
        color: u32,
        num_colors: usize,
    },
    #[error("{name} = {value} is outside its valid range {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// One color per node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorAssignment {
    colors: Vec<u32>,
}

impl ColorAssignment {
    pub fn new(colors: Vec<u32>, num_colors: usize) -> Result<Self, EnergyError> {
        if let Some((node, &color)) = colors
            .iter()
            .enumerate()
            .find(|(_, &c)| c as usize >= num_colors)
        {
            return Err(EnergyError::ColorOutOfRange {
                node,
                color,
                num_colors,
            });
        }
        Ok(Self { colors })
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Relabels colors: `color -> perm[color]`.
    pub fn permuted(&self, perm: &[u32]) -> Self {
        Self {
            colors: self.colors.iter().map(|&c| perm[c as usize]).collect(),
        }
    }
}

/// Weights of the interpolated cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Prefactor of the entropy term.
    pub gamma: f64,
    /// Upper bound of the per-edge coupling perturbation.
    pub h: f64,
    /// Annealing time in `[0, 1]`.
    pub t: f64,
}

impl CostParams {
    pub fn new(gamma: f64, h: f64, t: f64) -> Result<Self, EnergyError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(EnergyError::ParamOutOfRange {
                name: "gamma",
                value: gamma,
                range: "[0, inf)",
            });
        }
        if !(h >= 0.0 && h.is_finite()) {
            return Err(EnergyError::ParamOutOfRange {
                name: "h",
                value: h,
                range: "[0, inf)",
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(EnergyError::ParamOutOfRange {
                name: "t",
                value: t,
                range: "[0, 1]",
            });
        }
        Ok(Self { gamma, h, t })
    }

    pub fn at(self, t: f64) -> Self {
        Self { t, ..self }
    }
}

/// Fills `out` with one coupling `J = 1 + h_ij` per edge, `h_ij ~ U[0, h)`.
/// With `h = 0` no random numbers are consumed.
pub fn draw_couplings<R: Rng + ?Sized>(h: f64, rng: &mut R, out: &mut [f64]) {
    if h == 0.0 {
        out.fill(1.0);
    } else {
        for j in out.iter_mut() {
            *j = 1.0 + h * rng.random::<f64>();
        }
    }
}

/// Most probable color per node; ties go to the lowest color index. The
/// fixed node is always color 0.
pub fn extract_coloring(state: &AngleState) -> ColorAssignment {
    let c = state.num_colors();
    let amps = state.amplitudes();
    ColorAssignment {
        colors: amps.chunks_exact(c).map(argmax_squared).collect(),
    }
}

/// Index of the largest `x^2`, first one on ties.
pub(crate) fn argmax_squared(row: &[f64]) -> u32 {
    let mut best = 0;
    let mut best_p = row[0] * row[0];
    for (m, &x) in row.iter().enumerate().skip(1) {
        let p = x * x;
        if p > best_p {
            best = m;
            best_p = p;
        }
    }
    best as u32
}

/// Number of monochromatic edges.
pub fn potts_energy(g: &Graph, coloring: &ColorAssignment) -> usize {
    potts_energy_of(g, coloring.colors())
}

pub(crate) fn potts_energy_of(g: &Graph, colors: &[u32]) -> usize {
    debug_assert_eq!(colors.len(), g.num_nodes());
    g.edges()
        .iter()
        .filter(|&&(i, j)| colors[i as usize] == colors[j as usize])
        .count()
}

/// `-sum <Lx>` over all nodes except the fixed one.
pub fn energy_initial(state: &AngleState, ops: &AngularMomentumOps) -> f64 {
    -(0..state.num_nodes())
        .filter_map(|node| state.angles(node).map(|_| state.node_amplitudes(node)))
        .map(|psi| ops.lx_expectation(&psi))
        .sum::<f64>()
}

/// Coupling-weighted overlap of neighboring probability vectors with fresh
/// couplings drawn from `rng`.
pub fn energy_final<R: Rng + ?Sized>(state: &AngleState, g: &Graph, params: &CostParams, rng: &mut R) -> f64 {
    let mut couplings = vec![1.0; g.num_edges()];
    draw_couplings(params.h, rng, &mut couplings);
    energy_final_with(state, g, &couplings)
}

/// [`energy_final`] with explicit per-edge couplings `J_ij`.
pub fn energy_final_with(state: &AngleState, g: &Graph, couplings: &[f64]) -> f64 {
    let c = state.num_colors();
    let probs = state.probabilities();
    g.edges()
        .iter()
        .zip(couplings)
        .map(|(&(i, j), &jij)| {
            let pi = &probs[i as usize * c..(i as usize + 1) * c];
            let pj = &probs[j as usize * c..(j as usize + 1) * c];
            jij * pi.iter().zip(pj).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum()
}

/// `gamma * sum_i sum_m p log p` over all nodes, with `0 log 0 = 0`.
pub fn energy_weight(state: &AngleState, params: &CostParams) -> f64 {
    params.gamma
        * state
            .probabilities()
            .iter()
            .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
            .sum::<f64>()
}

/// `(1 - t) E_I + t (E_F + E_W)` with fresh couplings.
pub fn energy_total<R: Rng + ?Sized>(
    state: &AngleState,
    g: &Graph,
    ops: &AngularMomentumOps,
    params: &CostParams,
    rng: &mut R,
) -> f64 {
    let mut couplings = vec![1.0; g.num_edges()];
    draw_couplings(params.h, rng, &mut couplings);
    energy_total_with(state, g, ops, params, &couplings)
}

pub fn energy_total_with(
    state: &AngleState,
    g: &Graph,
    ops: &AngularMomentumOps,
    params: &CostParams,
    couplings: &[f64],
) -> f64 {
    let t = params.t;
    (1.0 - t) * energy_initial(state, ops)
        + t * (energy_final_with(state, g, couplings) + energy_weight(state, params))
}
