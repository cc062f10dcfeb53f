//! Qudit product states in hyperspherical coordinates.
//!
//! Each node carries a real unit vector of length `c` (one amplitude per
//! color) parameterized by `c - 1` angles:
//!
//! ```text
//! psi_k     = sin(phi_0) ... sin(phi_{k-1}) cos(phi_k)     k < c - 1
//! psi_{c-1} = sin(phi_0) ... sin(phi_{c-2})
//! ```
//!
//! The basis is the `Lz` eigenbasis ordered by increasing `m`, so color
//! index `k` corresponds to `m = k - l` with `l = (c - 1) / 2`.

use rand::Rng;
use thiserror::Error;

use crate::graph::Graph;

/// Below this, a prefix product of sines is treated as zero when inverting
/// the hyperspherical map.
const DEGENERATE_PREFIX: f64 = 1e-14;
const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("number of colors must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("amplitude vector has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("fixed node {index} out of range for {num_nodes} nodes")]
    FixedNodeOutOfRange { index: usize, num_nodes: usize },
    #[error("parameter vector has length {got}, expected {expected}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Writes the amplitudes for `angles` (length `c - 1`) into `out` (length `c`).
pub fn spherical_to_amplitudes_into(angles: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), angles.len() + 1);
    let mut prefix = 1.0;
    for (k, &phi) in angles.iter().enumerate() {
        let (s, c) = phi.sin_cos();
        out[k] = prefix * c;
        prefix *= s;
    }
    out[angles.len()] = prefix;
}

pub fn spherical_to_amplitudes(angles: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; angles.len() + 1];
    spherical_to_amplitudes_into(angles, &mut out);
    out
}

/// Inverse of [`spherical_to_amplitudes`].
///
/// `phi_k = atan2(|psi_{k+1..}|, psi_k)` for `k < c - 2` and
/// `phi_{c-2} = atan2(psi_{c-1}, psi_{c-2})`. Once the remaining tail has
/// vanished, all further angles are 0.
pub fn amplitudes_to_angles(psi: &[f64]) -> Result<Vec<f64>, StateError> {
    let c = psi.len();
    if c < 2 {
        return Err(StateError::InvalidDimension(c));
    }
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(StateError::NotNormalized(norm));
    }

    // tail_sq[k] = sum_{m >= k} psi_m^2
    let mut tail_sq = vec![0.0; c + 1];
    for k in (0..c).rev() {
        tail_sq[k] = tail_sq[k + 1] + psi[k] * psi[k];
    }

    let mut angles = vec![0.0; c - 1];
    for k in 0..c - 1 {
        if tail_sq[k].sqrt() < DEGENERATE_PREFIX {
            break;
        }
        angles[k] = if k == c - 2 {
            psi[c - 1].atan2(psi[c - 2])
        } else {
            tail_sq[k + 1].sqrt().atan2(psi[k])
        };
    }
    Ok(angles)
}

/// `Lz` and `Lx` for spin `l = (c - 1) / 2` in the `Lz` eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentumOps {
    dim: usize,
    /// Diagonal of `Lz`: `-l, ..., l`.
    lz: Vec<f64>,
    /// `lx_offdiag[k]` couples basis states `k` and `k + 1`.
    lx_offdiag: Vec<f64>,
}

pub fn build_ops(c: usize) -> Result<AngularMomentumOps, StateError> {
    AngularMomentumOps::new(c)
}

impl AngularMomentumOps {
    pub fn new(c: usize) -> Result<Self, StateError> {
        if c < 2 {
            return Err(StateError::InvalidDimension(c));
        }
        let l = (c as f64 - 1.0) / 2.0;
        let lz: Vec<f64> = (0..c).map(|k| k as f64 - l).collect();
        let lx_offdiag = lz[..c - 1]
            .iter()
            .map(|&m| 0.5 * ((l - m) * (l + m + 1.0)).sqrt())
            .collect();
        Ok(Self { dim: c, lz, lx_offdiag })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Spin quantum number `l = (c - 1) / 2`.
    pub fn l(&self) -> f64 {
        (self.dim as f64 - 1.0) / 2.0
    }

    pub fn lz_diagonal(&self) -> &[f64] {
        &self.lz
    }

    pub fn lx_offdiagonal(&self) -> &[f64] {
        &self.lx_offdiag
    }

    /// `out = Lx psi`.
    pub fn apply_lx(&self, psi: &[f64], out: &mut [f64]) {
        let c = self.dim;
        debug_assert!(psi.len() == c && out.len() == c);
        out[0] = self.lx_offdiag[0] * psi[1];
        for k in 1..c - 1 {
            out[k] = self.lx_offdiag[k - 1] * psi[k - 1] + self.lx_offdiag[k] * psi[k + 1];
        }
        out[c - 1] = self.lx_offdiag[c - 2] * psi[c - 2];
    }

    /// `psi^T Lx psi` for a real vector.
    pub fn lx_expectation(&self, psi: &[f64]) -> f64 {
        2.0 * self
            .lx_offdiag
            .iter()
            .enumerate()
            .map(|(k, &a)| a * psi[k] * psi[k + 1])
            .sum::<f64>()
    }

    /// Dense row-major `Lx`.
    pub fn lx_dense(&self) -> Vec<f64> {
        let c = self.dim;
        let mut m = vec![0.0; c * c];
        for (k, &a) in self.lx_offdiag.iter().enumerate() {
            m[k * c + k + 1] = a;
            m[(k + 1) * c + k] = a;
        }
        m
    }

    /// Dense row-major raising operator `L+ |m> = sqrt((l-m)(l+m+1)) |m+1>`.
    pub fn raising_dense(&self) -> Vec<f64> {
        let (c, l) = (self.dim, self.l());
        let mut out = vec![0.0; c * c];
        for k in 0..c - 1 {
            let m = self.lz[k];
            out[(k + 1) * c + k] = ((l - m) * (l + m + 1.0)).sqrt();
        }
        out
    }

    /// Dense row-major lowering operator `L- |m> = sqrt((l+m)(l-m+1)) |m-1>`.
    pub fn lowering_dense(&self) -> Vec<f64> {
        let (c, l) = (self.dim, self.l());
        let mut out = vec![0.0; c * c];
        for k in 1..c {
            let m = self.lz[k];
            out[(k - 1) * c + k] = ((l + m) * (l - m + 1.0)).sqrt();
        }
        out
    }
}

/// Ground state of `-Lx`: the `+l` eigenvector of `Lx` with non-negative
/// components, `psi_k = sqrt(binom(c - 1, k) / 2^(c - 1))`.
pub fn lx_ground_state(c: usize) -> Result<Vec<f64>, StateError> {
    if c < 2 {
        return Err(StateError::InvalidDimension(c));
    }
    let n = c - 1;
    let scale = 2f64.powi(n as i32);
    let mut binom = 1.0f64;
    let mut out = Vec::with_capacity(c);
    for k in 0..c {
        out.push((binom / scale).sqrt());
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    Ok(out)
}

/// Full angle parameterization of a product state.
///
/// Free nodes are laid out in node order, `c - 1` angles each; the fixed
/// node (if any) has no parameters and is pinned to color 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleState {
    num_nodes: usize,
    num_colors: usize,
    fixed_node: Option<usize>,
    params: Vec<f64>,
}

impl AngleState {
    pub fn from_params(
        num_nodes: usize,
        num_colors: usize,
        fixed_node: Option<usize>,
        params: Vec<f64>,
    ) -> Result<Self, StateError> {
        if num_colors < 2 {
            return Err(StateError::InvalidDimension(num_colors));
        }
        if let Some(index) = fixed_node {
            if index >= num_nodes {
                return Err(StateError::FixedNodeOutOfRange { index, num_nodes });
            }
        }
        let free = num_nodes - usize::from(fixed_node.is_some());
        let expected = free * (num_colors - 1);
        if params.len() != expected {
            return Err(StateError::LayoutMismatch {
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            num_nodes,
            num_colors,
            fixed_node,
            params,
        })
    }

    /// All free nodes at the same angle vector.
    pub fn uniform(
        num_nodes: usize,
        fixed_node: Option<usize>,
        angles: &[f64],
    ) -> Result<Self, StateError> {
        let free = num_nodes - usize::from(fixed_node.is_some());
        let params = angles.iter().copied().cycle().take(free * angles.len()).collect();
        Self::from_params(num_nodes, angles.len() + 1, fixed_node, params)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn fixed_node(&self) -> Option<usize> {
        self.fixed_node
    }

    pub fn num_free_nodes(&self) -> usize {
        self.num_nodes - usize::from(self.fixed_node.is_some())
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Position of `node` in the free-node layout.
    #[inline]
    pub fn slot(&self, node: usize) -> Option<usize> {
        match self.fixed_node {
            Some(f) if node == f => None,
            Some(f) if node > f => Some(node - 1),
            _ => Some(node),
        }
    }

    pub fn angles(&self, node: usize) -> Option<&[f64]> {
        let w = self.num_colors - 1;
        self.slot(node).map(|s| &self.params[s * w..(s + 1) * w])
    }

    /// Amplitudes of every node, row-major `num_nodes x num_colors`.
    pub fn amplitudes_into(&self, out: &mut [f64]) {
        let c = self.num_colors;
        debug_assert_eq!(out.len(), self.num_nodes * c);
        for (node, row) in out.chunks_exact_mut(c).enumerate() {
            match self.angles(node) {
                Some(angles) => spherical_to_amplitudes_into(angles, row),
                None => {
                    row.fill(0.0);
                    row[0] = 1.0;
                }
            }
        }
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_nodes * self.num_colors];
        self.amplitudes_into(&mut out);
        out
    }

    /// Componentwise squared amplitudes, row-major `num_nodes x num_colors`.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut out = self.amplitudes();
        out.iter_mut().for_each(|x| *x *= *x);
        out
    }

    pub fn node_amplitudes(&self, node: usize) -> Vec<f64> {
        match self.angles(node) {
            Some(angles) => spherical_to_amplitudes(angles),
            None => {
                let mut v = vec![0.0; self.num_colors];
                v[0] = 1.0;
                v
            }
        }
    }
}

fn check_fixed(g: &Graph, fixed_node: Option<usize>) -> Result<(), StateError> {
    match fixed_node {
        Some(index) if index >= g.num_nodes() => Err(StateError::FixedNodeOutOfRange {
            index,
            num_nodes: g.num_nodes(),
        }),
        _ => Ok(()),
    }
}

/// Annealing start: every free node in the ground state of `-Lx`, each angle
/// shifted by independent uniform noise in `[-f, f)`.
pub fn init_qdlqa_state<R: Rng + ?Sized>(
    g: &Graph,
    c: usize,
    f: f64,
    fixed_node: Option<usize>,
    rng: &mut R,
) -> Result<AngleState, StateError> {
    if !(f >= 0.0 && f.is_finite()) {
        return Err(StateError::InvalidParameter {
            name: "f",
            requirement: "finite and >= 0",
            value: f,
        });
    }
    check_fixed(g, fixed_node)?;
    let base = amplitudes_to_angles(&lx_ground_state(c)?)?;
    let mut state = AngleState::uniform(g.num_nodes(), fixed_node, &base)?;
    if f > 0.0 {
        for phi in state.params_mut() {
            *phi += f * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    Ok(state)
}

/// Gradient-descent start: per free node, `c` amplitudes uniform in
/// `[0, f_tilde)`, normalized.
pub fn init_qdgd_state<R: Rng + ?Sized>(
    g: &Graph,
    c: usize,
    f_tilde: f64,
    fixed_node: Option<usize>,
    rng: &mut R,
) -> Result<AngleState, StateError> {
    if !(f_tilde > 0.0 && f_tilde.is_finite()) {
        return Err(StateError::InvalidParameter {
            name: "f_tilde",
            requirement: "finite and > 0",
            value: f_tilde,
        });
    }
    if c < 2 {
        return Err(StateError::InvalidDimension(c));
    }
    check_fixed(g, fixed_node)?;

    let free = g.num_nodes() - usize::from(fixed_node.is_some());
    let mut params = Vec::with_capacity(free * (c - 1));
    let mut draw = vec![0.0; c];
    for _ in 0..free {
        let norm = loop {
            draw.iter_mut().for_each(|x| *x = f_tilde * rng.random::<f64>());
            let norm = draw.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        draw.iter_mut().for_each(|x| *x /= norm);
        params.extend(amplitudes_to_angles(&draw)?);
    }
    AngleState::from_params(g.num_nodes(), c, fixed_node, params)
}
