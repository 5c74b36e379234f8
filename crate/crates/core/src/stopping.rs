//! Termination rule `||r_k|| <= tau_a + tau_r ||r_0||` with an iteration cap.

use crate::error::{Error, Result};
use crate::vector::norm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    pub tau_a: f64,
    pub tau_r: f64,
    pub max_iterations: usize,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            tau_a: 1e-6,
            tau_r: 1e-8,
            max_iterations: 100_000,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_a >= 0.0 && self.tau_r >= 0.0) {
            return Err(Error::InvalidConfig("tolerances must be nonnegative"));
        }
        if self.tau_a == 0.0 && self.tau_r == 0.0 {
            return Err(Error::InvalidConfig("tau_a and tau_r cannot both be zero"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least one"));
        }
        Ok(())
    }

    /// Residual norm at or below which a run counts as converged.
    pub fn threshold(&self, r0_norm: f64) -> f64 {
        self.tau_a + self.tau_r * r0_norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Converged,
    MaxIterations,
}

/// Convergence is tested before the iteration cap.
pub fn stop_decision(residual_norm: f64, r0_norm: f64, k: usize, cfg: &StoppingConfig) -> StopDecision {
    if residual_norm <= cfg.threshold(r0_norm) {
        StopDecision::Converged
    } else if k >= cfg.max_iterations {
        StopDecision::MaxIterations
    } else {
        StopDecision::Continue
    }
}

pub fn should_stop(r: &[f64], r0_norm: f64, k: usize, cfg: &StoppingConfig) -> StopDecision {
    stop_decision(norm(r), r0_norm, k, cfg)
}
