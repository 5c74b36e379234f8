use alloc::vec::Vec;

use super::steps::{StepRecord, Stepper};
use super::{IterationState, MethodConfig};
use crate::error::{Error, Result};
use crate::stopping::{stop_decision, StopDecision, StoppingConfig};
use crate::system::NonlinearSystem;
use crate::vector::distance;

/// Monotonic time source in seconds. The core crate has no clock of its own.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero; timings are reported as `0.0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

pub struct SolveOptions<'a> {
    pub record_history: bool,
    /// Reference solution for per-iteration error norms.
    pub reference: Option<&'a [f64]>,
    pub clock: &'a dyn Clock,
}

impl Default for SolveOptions<'_> {
    fn default() -> Self {
        Self {
            record_history: false,
            reference: None,
            clock: &NoClock,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The update at `iteration` (0-based count of completed steps) failed.
    EvaluationFailure { iteration: usize, error: Error },
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iterations",
            Self::EvaluationFailure { .. } => "evaluation_failure",
        }
    }
}

/// One row of the convergence history. Row `k` describes `x_k`; its step
/// fields describe the update that produced `x_k` and are absent at `k = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub residual_norm: f64,
    pub error_norm: Option<f64>,
    pub step: Option<StepRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub solution: Vec<f64>,
    pub history: Vec<IterationRecord>,
    /// Pseudoinverse steps whose LSQR solve hit its inner budget.
    pub lsqr_capped_steps: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Runs the configured method from `x0` until the stopping rule fires.
///
/// Errors are returned only for invalid inputs (bad configuration, wrong
/// dimensions, non-finite starting residual). Failures during the iteration
/// are reported through [`SolveStatus::EvaluationFailure`]. The clock is read
/// around the iteration loop only.
pub fn solve<S: NonlinearSystem + ?Sized>(
    system: &S,
    x0: &[f64],
    config: &MethodConfig,
    stop: &StoppingConfig,
    options: &SolveOptions<'_>,
) -> Result<SolveReport> {
    stop.validate()?;
    if let Some(reference) = options.reference {
        if reference.len() != system.unknowns() {
            return Err(Error::DimensionMismatch {
                expected: system.unknowns(),
                found: reference.len(),
            });
        }
    }
    let mut stepper = Stepper::new(system, *config)?;
    let mut state = IterationState::new(system, x0.to_vec())?;
    let r0 = state.residual_norm();
    let error_of = |x: &[f64]| options.reference.map(|xr| distance(x, xr));

    let mut history = Vec::new();
    if options.record_history {
        history.push(IterationRecord {
            k: 0,
            residual_norm: r0,
            error_norm: error_of(&state.x),
            step: None,
        });
    }

    let mut lsqr_capped_steps = 0;
    let mut residual_norm = r0;
    let start = options.clock.now();
    let status = loop {
        match stop_decision(residual_norm, r0, state.k, stop) {
            StopDecision::Converged => break SolveStatus::Converged,
            StopDecision::MaxIterations => break SolveStatus::MaxIterations,
            StopDecision::Continue => {}
        }
        let record = match stepper.step(&mut state) {
            Ok(record) => record,
            Err(error) => {
                break SolveStatus::EvaluationFailure {
                    iteration: state.k,
                    error,
                }
            }
        };
        lsqr_capped_steps += usize::from(record.lsqr_capped);
        residual_norm = state.residual_norm();
        if options.record_history {
            history.push(IterationRecord {
                k: state.k,
                residual_norm,
                error_norm: error_of(&state.x),
                step: Some(record),
            });
        }
    };
    let wall_seconds = options.clock.now() - start;

    Ok(SolveReport {
        status,
        iterations: state.k,
        wall_seconds,
        initial_residual_norm: r0,
        final_residual_norm: residual_norm,
        solution: state.x,
        history,
        lsqr_capped_steps,
    })
}
