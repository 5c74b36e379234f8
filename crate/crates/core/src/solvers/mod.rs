//! Nonlinear Kaczmarz update rules and the outer solve loop.
//!
//! Every method shares the same loop: evaluate `F(x_k)`, test the stopping
//! rule, select a row or block from the residual, and apply one update. The
//! methods differ only in selection and in how the step is formed.

mod adaptive;
mod solve;
mod steps;

use core::fmt;
use core::str::FromStr;

use alloc::vec::Vec;

pub use adaptive::{adaptive_params, block_quantities, momentum_angle, AdaptiveParams, BlockQuantities};
pub use solve::{solve, Clock, IterationRecord, NoClock, SolveOptions, SolveReport, SolveStatus};
pub use steps::{Branch, StepRecord, Stepper};

use crate::error::{Error, Result};
use crate::lsqr::LsqrConfig;
use crate::system::{residual_checked, NonlinearSystem};
use crate::vector::norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Averaged block step with adaptive momentum and the safeguarded fallback.
    Abnkam,
    /// Adaptive momentum whenever the 2x2 projection system is nonsingular.
    AbnkamIdeal,
    /// Averaged block step with the extrapolated step size, no momentum.
    Abnk2,
    /// Averaged block step with constant step size and momentum.
    AbnkmConst,
    /// Cyclic single-row nonlinear Kaczmarz.
    Nk,
    /// Uniformly random single row.
    Nurk,
    /// Single row of maximum residual.
    Mrnk,
    /// Greedy randomized single row, relaxed.
    Ngrk,
    /// Greedy randomized single row with heavy-ball momentum.
    Ngrkm,
    /// Pseudoinverse block step on the greedy set.
    Mrbnk,
    /// Pseudoinverse block step on the capped set.
    Rbcnk,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Self::Abnkam,
        Self::AbnkamIdeal,
        Self::Abnk2,
        Self::AbnkmConst,
        Self::Nk,
        Self::Nurk,
        Self::Mrnk,
        Self::Ngrk,
        Self::Ngrkm,
        Self::Mrbnk,
        Self::Rbcnk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Abnkam => "abnkam",
            Self::AbnkamIdeal => "abnkam_ideal",
            Self::Abnk2 => "abnk2",
            Self::AbnkmConst => "abnkm_const",
            Self::Nk => "nk",
            Self::Nurk => "nurk",
            Self::Mrnk => "mrnk",
            Self::Ngrk => "ngrk",
            Self::Ngrkm => "ngrkm",
            Self::Mrbnk => "mrbnk",
            Self::Rbcnk => "rbcnk",
        }
    }

    /// Whether the method draws from the random stream.
    pub fn is_randomized(self) -> bool {
        matches!(self, Self::Nurk | Self::Ngrk | Self::Ngrkm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|m| m.name() == key || (key == "rb_cnk" && *m == Self::Rbcnk))
            .ok_or(Error::InvalidConfig("unknown method name"))
    }
}

/// Convex weights applied to the single-row projections of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `w_i = ||∇F_i||^2 / Σ_J ||∇F_j||^2`.
    #[default]
    Natural,
    /// `w_i = 1 / |J|`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub theta: f64,
    /// Guard on `|Δ_k|`, measured for the direction `(F'_J)^T F_J`, below
    /// which the momentum branch is refused.
    pub epsilon: f64,
    pub beta_max: f64,
    /// Constant step size for the constant-parameter and row methods.
    pub alpha: f64,
    /// Constant momentum for the constant-parameter methods and NGRKm.
    pub beta: f64,
    pub weights: WeightMode,
    pub seed: u64,
    pub lsqr: LsqrConfig,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            theta: 0.5,
            epsilon: 1e-16,
            beta_max: f64::INFINITY,
            alpha: 1.0,
            beta: if method == Method::Ngrkm { 0.3 } else { 0.0 },
            weights: WeightMode::Natural,
            seed: 0,
            lsqr: LsqrConfig::default(),
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidConfig("theta must lie in (0, 1]"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be nonnegative"));
        }
        if !(self.beta_max > 0.0) {
            return Err(Error::InvalidConfig("beta_max must be positive"));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidConfig("alpha and beta must be finite"));
        }
        if self.method == Method::AbnkmConst && !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidConfig("constant step size must lie in (0, 2)"));
        }
        if !(self.lsqr.atol > 0.0 && self.lsqr.btol > 0.0) {
            return Err(Error::InvalidConfig("lsqr tolerances must be positive"));
        }
        Ok(())
    }
}

/// Iterate, previous iterate and residual `F(x_k)` at the loop head.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub x: Vec<f64>,
    pub x_prev: Option<Vec<f64>>,
    /// `F(x)`; the update rules only use squared magnitudes and products
    /// with gradients, so the sign convention `r_k = -F(x_k)` is not stored.
    pub residual: Vec<f64>,
    pub k: usize,
}

impl IterationState {
    pub fn new<S: NonlinearSystem + ?Sized>(system: &S, x0: Vec<f64>) -> Result<Self> {
        let mut residual = alloc::vec![0.0; system.equations()];
        residual_checked(system, &x0, &mut residual)?;
        Ok(Self {
            x: x0,
            x_prev: None,
            residual,
            k: 0,
        })
    }

    pub fn residual_norm(&self) -> f64 {
        norm(&self.residual)
    }

    /// Moves to `x_next`, re-evaluating the residual.
    ///
    /// On an evaluation error the state is left untouched.
    pub fn advance<S: NonlinearSystem + ?Sized>(&mut self, system: &S, x_next: Vec<f64>) -> Result<()> {
        let mut residual = alloc::vec![0.0; self.residual.len()];
        residual_checked(system, &x_next, &mut residual)?;
        self.x_prev = Some(core::mem::replace(&mut self.x, x_next));
        self.residual = residual;
        self.k += 1;
        Ok(())
    }
}
