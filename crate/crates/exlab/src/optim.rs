//! Centered RMSProp with momentum, in descent form: callers minimising a
//! loss pass its gradient directly; callers maximising an objective negate
//! the gradient first.

use crate::policy::ParameterVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("gradient length {got} does not match parameter length {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub decay: f64,
    pub momentum: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig {
            learning_rate: 0.005,
            decay: 0.9,
            momentum: 0.9,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter optimizer state: running mean of squared gradients, running
/// mean of gradients (the centering term), and the momentum buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    pub avg_sq: Vec<f64>,
    pub avg: Vec<f64>,
    pub momentum_buf: Vec<f64>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig, dim: usize) -> Self {
        RmsProp {
            config,
            avg_sq: vec![0.0; dim],
            avg: vec![0.0; dim],
            momentum_buf: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.avg_sq.len()
    }

    /// Grow the state with zeroed slots when the feature set grows.
    pub fn extend_to(&mut self, dim: usize) {
        if dim > self.avg_sq.len() {
            self.avg_sq.resize(dim, 0.0);
            self.avg.resize(dim, 0.0);
            self.momentum_buf.resize(dim, 0.0);
        }
    }

    /// One descent step. On any non-finite gradient component the update is
    /// rejected and neither `params` nor the optimizer state changes.
    pub fn step(&mut self, params: &mut ParameterVector, grad: &[f64]) -> Result<(), OptimError> {
        if grad.len() != params.len() || grad.len() != self.avg_sq.len() {
            return Err(OptimError::LengthMismatch {
                got: grad.len(),
                expected: params.len(),
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(OptimError::NonFiniteGradient(i));
        }
        let RmsPropConfig {
            learning_rate,
            decay,
            momentum,
            epsilon,
        } = self.config;
        for i in 0..grad.len() {
            let g = grad[i];
            self.avg_sq[i] = decay * self.avg_sq[i] + (1.0 - decay) * g * g;
            self.avg[i] = decay * self.avg[i] + (1.0 - decay) * g;
            let centered = self.avg_sq[i] - self.avg[i] * self.avg[i];
            self.momentum_buf[i] =
                momentum * self.momentum_buf[i] + learning_rate * g / (centered + epsilon).sqrt();
            params.0[i] -= self.momentum_buf[i];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_hand_value() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 1);
        let mut theta = ParameterVector::zeros(1);
        opt.step(&mut theta, &[1.0]).unwrap();
        // avg_sq = 0.1, avg = 0.1, centered = 0.09,
        // step = 0.005 / sqrt(0.09 + 1e-8) ~= 0.0166667
        assert!((theta.0[0] - (-0.0166667)).abs() < 1e-6);
        assert!((opt.momentum_buf[0] - 0.0166667).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_on_fresh_state_is_a_no_op() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 3);
        let mut theta = ParameterVector(vec![0.5, -1.0, 2.0]);
        let before = theta.clone();
        opt.step(&mut theta, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(theta, before);
        assert!(opt.momentum_buf.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn momentum_carries_across_steps() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 1);
        let mut theta = ParameterVector::zeros(1);
        opt.step(&mut theta, &[1.0]).unwrap();
        let after_one = theta.0[0];
        // a zero gradient still moves the parameter via momentum
        opt.step(&mut theta, &[0.0]).unwrap();
        let expected = after_one - 0.9 * 0.0166667;
        assert!((theta.0[0] - expected).abs() < 1e-6);
    }

    #[test]
    fn recurrence_matches_reference_loop() {
        // independent scalar re-implementation over a fixed gradient stream
        let grads = [0.3, -1.1, 0.05, 0.7, -0.2, 0.0, 2.0, -0.6];
        let (lr, rho, mu, eps) = (0.005, 0.9, 0.9, 1e-8);
        let (mut sq, mut av, mut mom, mut th) = (0.0, 0.0, 0.0, 0.0);
        for &g in &grads {
            sq = rho * sq + (1.0 - rho) * g * g;
            av = rho * av + (1.0 - rho) * g;
            mom = mu * mom + lr * g / ((sq - av * av) as f64 + eps).sqrt();
            th -= mom;
        }
        let mut opt = RmsProp::new(RmsPropConfig::default(), 1);
        let mut theta = ParameterVector::zeros(1);
        for &g in &grads {
            opt.step(&mut theta, &[g]).unwrap();
        }
        assert!((theta.0[0] - th).abs() < 1e-12);
    }

    #[test]
    fn non_finite_gradient_rejected_without_side_effects() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 2);
        let mut theta = ParameterVector(vec![1.0, 2.0]);
        opt.step(&mut theta, &[0.5, -0.5]).unwrap();
        let theta_before = theta.clone();
        let opt_before = opt.clone();
        assert!(matches!(
            opt.step(&mut theta, &[f64::NAN, 0.1]),
            Err(OptimError::NonFiniteGradient(0))
        ));
        assert!(matches!(
            opt.step(&mut theta, &[0.1, f64::INFINITY]),
            Err(OptimError::NonFiniteGradient(1))
        ));
        assert_eq!(theta, theta_before);
        assert_eq!(opt, opt_before);
    }

    #[test]
    fn extend_to_adds_zeroed_slots() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 1);
        let mut theta = ParameterVector::zeros(1);
        opt.step(&mut theta, &[1.0]).unwrap();
        opt.extend_to(3);
        theta.extend_to(3);
        assert_eq!(opt.dim(), 3);
        assert_eq!(opt.avg_sq[1], 0.0);
        assert_eq!(opt.momentum_buf[2], 0.0);
        // new slots behave like a fresh optimizer
        opt.step(&mut theta, &[0.0, 1.0, 0.0]).unwrap();
        assert!((theta.0[1] - (-0.0166667)).abs() < 1e-6);
    }

    #[test]
    fn length_mismatch_errors() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 2);
        let mut theta = ParameterVector::zeros(2);
        assert!(matches!(
            opt.step(&mut theta, &[1.0]),
            Err(OptimError::LengthMismatch { .. })
        ));
    }
}
