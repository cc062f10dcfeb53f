//! Adam on a flat parameter vector.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("gradient has length {grad}, parameters have length {params}, moments have length {moments}")]
pub struct LayoutMismatch {
    pub params: usize,
    pub grad: usize,
    pub moments: usize,
}

/// Bias-corrected Adam with constant learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Adam {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPSILON: f64 = 1e-8;

    /// Zeroed moments for `len` parameters and the usual constants.
    pub fn new(len: usize, eta: f64) -> Self {
        Self {
            eta,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            epsilon: Self::EPSILON,
            step_count: 0,
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }

    /// Clears the moments and the step counter.
    pub fn reset(&mut self) {
        self.step_count = 0;
        self.first_moment.fill(0.0);
        self.second_moment.fill(0.0);
    }

    /// One update `theta -= eta * m_hat / (sqrt(v_hat) + epsilon)`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<(), LayoutMismatch> {
        if params.len() != grad.len() || params.len() != self.first_moment.len() {
            return Err(LayoutMismatch {
                params: params.len(),
                grad: grad.len(),
                moments: self.first_moment.len(),
            });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2_sqrt = (1.0 - self.beta2.powi(t)).sqrt();
        let step_size = self.eta / bias1;

        for (((theta, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let denom = v.sqrt() / bias2_sqrt + self.epsilon;
            *theta -= step_size * *m / denom;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut adam = Adam::new(3, 0.5);
        let mut theta = vec![1.0, -2.0, 0.0];
        adam.step(&mut theta, &[1.0, 1.0, 1.0]).unwrap();
        for (after, before) in theta.iter().zip([1.0, -2.0, 0.0]) {
            assert!((before - after - 0.5).abs() < 1e-7);
        }
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = Adam::new(2, 0.5);
        let mut theta = vec![0.3, 0.7];
        for _ in 0..50 {
            adam.step(&mut theta, &[0.0, 0.0]).unwrap();
        }
        assert_eq!(theta, vec![0.3, 0.7]);
        assert_eq!(adam.step_count(), 50);
    }

    #[test]
    fn quadratic_converges() {
        // Scalar simulation of f(x) = x^2 from x = 1.
        let mut adam = Adam::new(1, 0.1);
        let mut x = vec![1.0];
        for _ in 0..500 {
            let g = [2.0 * x[0]];
            adam.step(&mut x, &g).unwrap();
        }
        assert!(x[0].abs() < 1e-3, "x = {}", x[0]);
        // Reference trajectory end point (same recursion run independently
        // in double precision).
        assert!((x[0] - -4.156785139822518e-12).abs() < 1e-17);
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let mut adam = Adam::new(2, 0.1);
        let mut theta = vec![0.0; 2];
        assert!(adam.step(&mut theta, &[1.0]).is_err());
        let mut longer = vec![0.0; 3];
        assert!(adam.step(&mut longer, &[1.0; 3]).is_err());
        assert_eq!(adam.step_count(), 0);
    }

    #[test]
    fn reset_clears_moments() {
        let mut adam = Adam::new(1, 0.1);
        let mut x = vec![1.0];
        adam.step(&mut x, &[3.0]).unwrap();
        assert!(adam.second_moment()[0] > 0.0);
        adam.reset();
        assert_eq!(adam, Adam::new(1, 0.1));
    }
}
