//! Exact gradient of the interpolated cost with respect to the free angles.
//!
//! Derivatives are taken in two stages. First the cost is differentiated
//! with respect to each node's amplitudes:
//!
//! ```text
//! dE/dpsi_i = -2 (1 - t) Lx psi_i                      (free nodes only)
//!           + 2 t psi_i * sum_{j ~ i} J_ij p_j
//!           + 2 t gamma psi_i * (log max(p_i, 1e-12) + 1)
//! ```
//!
//! and then pulled back through the hyperspherical map. With prefix sine
//! products `P_k` and the backward accumulator
//! `Q_{c-2} = g_{c-1}`, `Q_k = g_{k+1} cos(phi_{k+1}) + sin(phi_{k+1}) Q_{k+1}`,
//! the angle gradient is `dE/dphi_k = P_k (cos(phi_k) Q_k - sin(phi_k) g_k)`,
//! which is `O(c)` per node.

use rand::Rng;
use serde::Serialize;

use crate::energy::{draw_couplings, CostParams, LOG_CLAMP};
use crate::graph::Graph;
use crate::state::{AngleState, AngularMomentumOps};

/// Value of each cost term at the last evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub initial: f64,
    pub final_: f64,
    pub weight: f64,
    pub total: f64,
}

/// Caller-owned scratch space for repeated value-and-gradient evaluations.
///
/// Holds the current per-edge couplings; callers either redraw them before
/// each evaluation or freeze them.
#[derive(Debug, Clone)]
pub struct CostWorkspace {
    num_colors: usize,
    amps: Vec<f64>,
    probs: Vec<f64>,
    sins: Vec<f64>,
    coss: Vec<f64>,
    /// Per node: `sum_j J_ij p_j`, later reused for `dE/dpsi`.
    field: Vec<f64>,
    lx_psi: Vec<f64>,
    couplings: Vec<f64>,
    grad: Vec<f64>,
}

impl CostWorkspace {
    pub fn new(g: &Graph, num_colors: usize) -> Self {
        let n = g.num_nodes();
        let c = num_colors;
        Self {
            num_colors: c,
            amps: vec![0.0; n * c],
            probs: vec![0.0; n * c],
            sins: vec![0.0; n * (c - 1)],
            coss: vec![0.0; n * (c - 1)],
            field: vec![0.0; n * c],
            lx_psi: vec![0.0; c],
            couplings: vec![1.0; g.num_edges()],
            grad: Vec::new(),
        }
    }

    pub fn draw_couplings<R: Rng + ?Sized>(&mut self, h: f64, rng: &mut R) {
        draw_couplings(h, rng, &mut self.couplings);
    }

    pub fn set_couplings(&mut self, couplings: &[f64]) {
        self.couplings.copy_from_slice(couplings);
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Gradient from the last [`evaluate`](Self::evaluate), laid out like
    /// [`AngleState::params`].
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// Row-major amplitudes from the last evaluation.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// Evaluates the cost with the current couplings and stores its gradient.
    pub fn evaluate(
        &mut self,
        state: &AngleState,
        g: &Graph,
        ops: &AngularMomentumOps,
        params: &CostParams,
    ) -> CostBreakdown {
        let c = self.num_colors;
        let w = c - 1;
        debug_assert_eq!(state.num_colors(), c);
        debug_assert_eq!(state.num_nodes() * c, self.amps.len());
        let t = params.t;
        let gamma = params.gamma;

        // Amplitudes, keeping the sines and cosines for the pull-back.
        for node in 0..state.num_nodes() {
            let row = &mut self.amps[node * c..(node + 1) * c];
            match state.angles(node) {
                Some(angles) => {
                    let sins = &mut self.sins[node * w..(node + 1) * w];
                    let coss = &mut self.coss[node * w..(node + 1) * w];
                    let mut prefix = 1.0;
                    for k in 0..w {
                        let (s, co) = angles[k].sin_cos();
                        sins[k] = s;
                        coss[k] = co;
                        row[k] = prefix * co;
                        prefix *= s;
                    }
                    row[w] = prefix;
                }
                None => {
                    row.fill(0.0);
                    row[0] = 1.0;
                }
            }
        }
        for (p, a) in self.probs.iter_mut().zip(&self.amps) {
            *p = a * a;
        }

        // Coupling field and E_F.
        self.field.fill(0.0);
        let mut e_final = 0.0;
        for (&(i, j), &jij) in g.edges().iter().zip(&self.couplings) {
            let (i, j) = (i as usize, j as usize);
            let mut overlap = 0.0;
            for m in 0..c {
                let pi = self.probs[i * c + m];
                let pj = self.probs[j * c + m];
                overlap += pi * pj;
                self.field[i * c + m] += jij * pj;
                self.field[j * c + m] += jij * pi;
            }
            e_final += jij * overlap;
        }

        let num_free = state.num_free_nodes();
        self.grad.resize(num_free * w, 0.0);

        let mut e_weight = 0.0;
        let mut e_initial = 0.0;
        for node in 0..state.num_nodes() {
            let psi = &self.amps[node * c..(node + 1) * c];
            let p = &self.probs[node * c..(node + 1) * c];
            for &pm in p {
                if pm > 0.0 {
                    e_weight += pm * pm.ln();
                }
            }
            let Some(slot) = state.slot(node) else {
                continue;
            };

            ops.apply_lx(psi, &mut self.lx_psi);
            e_initial -= psi.iter().zip(&self.lx_psi).map(|(a, b)| a * b).sum::<f64>();

            // dE/dpsi, written over the coupling field.
            let dpsi = &mut self.field[node * c..(node + 1) * c];
            for m in 0..c {
                let log_term = gamma * (p[m].max(LOG_CLAMP).ln() + 1.0);
                dpsi[m] = 2.0 * t * psi[m] * (dpsi[m] + log_term) - 2.0 * (1.0 - t) * self.lx_psi[m];
            }

            // Pull back through the hyperspherical map.
            let sins = &self.sins[node * w..(node + 1) * w];
            let coss = &self.coss[node * w..(node + 1) * w];
            let out = &mut self.grad[slot * w..(slot + 1) * w];
            let mut q = dpsi[w];
            for k in (0..w).rev() {
                if k < w - 1 {
                    q = dpsi[k + 1] * coss[k + 1] + sins[k + 1] * q;
                }
                out[k] = coss[k] * q - sins[k] * dpsi[k];
            }
            let mut prefix = 1.0;
            for k in 0..w {
                out[k] *= prefix;
                prefix *= sins[k];
            }
        }
        e_weight *= gamma;

        CostBreakdown {
            initial: e_initial,
            final_: e_final,
            weight: e_weight,
            total: (1.0 - t) * e_initial + t * (e_final + e_weight),
        }
    }
}

/// Value and gradient of the interpolated cost. Uses `frozen_couplings`
/// when given, otherwise draws fresh couplings from `rng`.
pub fn grad_total<R: Rng + ?Sized>(
    state: &AngleState,
    g: &Graph,
    ops: &AngularMomentumOps,
    params: &CostParams,
    frozen_couplings: Option<&[f64]>,
    rng: &mut R,
) -> (f64, Vec<f64>) {
    let mut ws = CostWorkspace::new(g, state.num_colors());
    match frozen_couplings {
        Some(j) => ws.set_couplings(j),
        None => ws.draw_couplings(params.h, rng),
    }
    let value = ws.evaluate(state, g, ops, params).total;
    (value, ws.grad)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentCheck {
    pub node: usize,
    pub angle: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
    /// The node has a probability below the log clamp, so the analytic
    /// gradient is not the derivative of the unclamped value.
    pub clamp_affected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub step: f64,
    pub tolerance: f64,
    pub components: Vec<ComponentCheck>,
    /// Largest relative error among components not affected by the clamp.
    pub max_rel_error: f64,
    pub clamp_affected: usize,
    pub passed: bool,
}

/// Components smaller than this are compared in absolute terms.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// `|a - b| / max(|a|, |b|, REL_ERROR_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERROR_FLOOR)
}

/// Compares the analytic gradient with central differences of step `step`.
/// Couplings are drawn once from `rng` and frozen for all evaluations.
pub fn check_gradient<R: Rng + ?Sized>(
    state: &AngleState,
    g: &Graph,
    ops: &AngularMomentumOps,
    params: &CostParams,
    step: f64,
    tol: f64,
    rng: &mut R,
) -> GradientReport {
    let step = step.clamp(1e-7, 1e-3);
    let c = state.num_colors();
    let w = c - 1;
    let mut ws = CostWorkspace::new(g, c);
    ws.draw_couplings(params.h, rng);
    ws.evaluate(state, g, ops, params);
    let analytic = ws.grad.clone();
    let probs = ws.probs.clone();

    let mut probe = state.clone();
    let mut components = Vec::with_capacity(analytic.len());
    for node in 0..state.num_nodes() {
        let Some(slot) = state.slot(node) else {
            continue;
        };
        let clamp_affected = params.t > 0.0
            && params.gamma > 0.0
            && probs[node * c..(node + 1) * c].iter().any(|&p| p < LOG_CLAMP);
        for k in 0..w {
            let idx = slot * w + k;
            let original = probe.params()[idx];
            probe.params_mut()[idx] = original + step;
            let plus = ws.evaluate(&probe, g, ops, params).total;
            probe.params_mut()[idx] = original - step;
            let minus = ws.evaluate(&probe, g, ops, params).total;
            probe.params_mut()[idx] = original;
            let numeric = (plus - minus) / (2.0 * step);
            components.push(ComponentCheck {
                node,
                angle: k,
                analytic: analytic[idx],
                numeric,
                rel_error: relative_error(analytic[idx], numeric),
                clamp_affected,
            });
        }
    }

    let max_rel_error = components
        .iter()
        .filter(|c| !c.clamp_affected)
        .map(|c| c.rel_error)
        .fold(0.0, f64::max);
    GradientReport {
        step,
        tolerance: tol,
        clamp_affected: components.iter().filter(|c| c.clamp_affected).count(),
        passed: max_rel_error < tol,
        max_rel_error,
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_total_with;
    use crate::graph::generators;
    use crate::state::{amplitudes_to_angles, build_ops, init_qdgd_state, lx_ground_state};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stationary_at_ground_state() {
        let g = generators::path(2);
        let ops = build_ops(4).unwrap();
        let base = amplitudes_to_angles(&lx_ground_state(4).unwrap()).unwrap();
        let state = AngleState::uniform(2, Some(0), &base).unwrap();
        let params = CostParams::new(1.0, 3.0, 0.0).unwrap();
        let (_, grad) = grad_total(&state, &g, &ops, &params, None, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(grad.iter().all(|x| x.abs() < 1e-9), "{grad:?}");
    }

    #[test]
    fn disjoint_supports_without_entropy_have_zero_gradient() {
        // Graphs always have edges after preprocessing; two one-hot nodes on
        // different colors see no coupling field at all.
        let g = generators::path(2);
        let ops = build_ops(3).unwrap();
        let state = AngleState::from_params(2, 3, None, vec![0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let params = CostParams::new(0.0, 0.0, 1.0).unwrap();
        let (value, grad) = grad_total(&state, &g, &ops, &params, None, &mut ChaCha8Rng::seed_from_u64(0));
        assert_abs_diff_eq!(value, 0.0, epsilon = 1e-15);
        assert!(grad.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn workspace_value_matches_reference_energy() {
        let g = generators::queen(5, 5);
        let ops = build_ops(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let state = init_qdgd_state(&g, 5, 1.0, Some(g.j_max()), &mut rng).unwrap();
        let params = CostParams::new(0.7, 3.0, 0.37).unwrap();
        let mut ws = CostWorkspace::new(&g, 5);
        ws.draw_couplings(params.h, &mut rng);
        let breakdown = ws.evaluate(&state, &g, &ops, &params);
        let reference = energy_total_with(&state, &g, &ops, &params, ws.couplings());
        assert_abs_diff_eq!(breakdown.total, reference, epsilon = 1e-10);
    }

    #[test]
    fn gradient_check_passes_at_smooth_points() {
        let g = generators::queen(5, 5);
        let ops = build_ops(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for t in [0.0, 0.37, 1.0] {
            let state = init_qdgd_state(&g, 5, 1.0, Some(g.j_max()), &mut rng).unwrap();
            let params = CostParams::new(1.0, 3.0, t).unwrap();
            let report = check_gradient(&state, &g, &ops, &params, 1e-5, 1e-4, &mut rng);
            assert!(report.passed, "t = {t}: max rel error {}", report.max_rel_error);
            assert_eq!(report.clamp_affected, 0);
        }
    }

    #[test]
    fn one_hot_nodes_are_flagged() {
        let g = generators::path(3);
        let ops = build_ops(3).unwrap();
        let state = AngleState::from_params(3, 3, None, vec![0.0, 0.0, 0.4, 0.9, 1.2, 0.3]).unwrap();
        let params = CostParams::new(1.0, 0.0, 0.5).unwrap();
        let report = check_gradient(&state, &g, &ops, &params, 1e-5, 1e-4, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(report.clamp_affected, 2);
        assert!(report.components.iter().filter(|c| c.node == 0).all(|c| c.clamp_affected));
        assert!(report.passed);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert_abs_diff_eq!(relative_error(2.0, 1.0), 0.5);
        assert_abs_diff_eq!(relative_error(1e-9, 0.0), 1e-3);
    }
}
