//! Grid execution: one timed solve per cell, optional history runs and
//! reference solutions for error curves.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nlk_core::{
    make_problem, solve, IterationRecord, Method, MethodConfig, NonlinearSystem, Problem, ProblemKind, ProblemSpec,
    SolveOptions, SolveStatus, StoppingConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::StdClock;
use crate::error::{BenchError, Result};

/// Greedy threshold used when a grid does not set one.
///
/// The H-equation runs the greedy-set methods at 0.1; everything else,
/// including the capped rule of RB-CNK, uses 0.5.
pub fn default_theta(problem: ProblemKind, method: Method) -> f64 {
    let greedy_set = matches!(
        method,
        Method::Abnkam | Method::AbnkamIdeal | Method::Abnk2 | Method::AbnkmConst | Method::Mrbnk
    );
    if problem == ProblemKind::ChandrasekharH && greedy_set {
        0.1
    } else {
        0.5
    }
}

/// One method on one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub problem: ProblemSpec,
    pub method: MethodConfig,
    pub stop: StoppingConfig,
}

impl Cell {
    /// Default method parameters with the per-problem greedy threshold.
    pub fn new(problem: ProblemSpec, method: Method) -> Self {
        Self {
            problem,
            method: MethodConfig::new(method).with_theta(default_theta(problem.kind, method)),
            stop: StoppingConfig::default(),
        }
    }

    pub fn with_stop(mut self, stop: StoppingConfig) -> Self {
        self.stop = stop;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIterations,
    EvaluationFailure,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIterations => "max_iterations",
            Self::EvaluationFailure => "evaluation_failure",
        }
    }
}

impl From<&SolveStatus> for RunStatus {
    fn from(status: &SolveStatus) -> Self {
        match status {
            SolveStatus::Converged => Self::Converged,
            SolveStatus::MaxIterations => Self::MaxIterations,
            SolveStatus::EvaluationFailure { .. } => Self::EvaluationFailure,
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "converged" => Ok(Self::Converged),
            "max_iterations" => Ok(Self::MaxIterations),
            "evaluation_failure" => Ok(Self::EvaluationFailure),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(with = "method_name")]
    pub method: Method,
    pub problem: String,
    pub m: usize,
    pub theta: f64,
    pub seed: u64,
    pub status: RunStatus,
    pub iterations: usize,
    pub cpu_seconds: f64,
    pub final_residual: f64,
    pub speedup: Option<f64>,
}

mod method_name {
    use nlk_core::Method;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(method: &Method, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(method.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(|_| D::Error::custom(format!("unknown method {name:?}")))
    }
}

/// A finished cell: its summary row, plus the convergence history when one
/// was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub history: Option<Vec<IterationRecord>>,
    /// Description of the evaluation failure, if any.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SuiteOptions {
    /// Run each cell a second time with history recording.
    pub record_history: bool,
    /// Compute a tight-tolerance reference solution per problem and record
    /// error norms in the histories.
    pub reference: bool,
    /// Execute cells on the rayon pool. Timings then share the machine.
    pub parallel: bool,
}

/// Runs `method` on an arbitrary system.
///
/// The summary row comes from a solve without history; if `record_history`
/// is set, a second solve records the history (with error norms against
/// `reference` when given).
pub fn run_case<S: NonlinearSystem + ?Sized>(
    label: &str,
    system: &S,
    x0: &[f64],
    method: &MethodConfig,
    stop: &StoppingConfig,
    reference: Option<&[f64]>,
    record_history: bool,
) -> RunOutput {
    let clock = StdClock::new();
    let timed = SolveOptions {
        record_history: false,
        reference: None,
        clock: &clock,
    };
    let m = system.equations();
    let mut record = RunRecord {
        method: method.method,
        problem: label.to_string(),
        m,
        theta: method.theta,
        seed: method.seed,
        status: RunStatus::EvaluationFailure,
        iterations: 0,
        cpu_seconds: 0.0,
        final_residual: f64::NAN,
        speedup: None,
    };
    let report = match solve(system, x0, method, stop, &timed) {
        Ok(report) => report,
        Err(error) => {
            return RunOutput {
                record,
                history: None,
                failure: Some(error.to_string()),
            }
        }
    };
    record.status = RunStatus::from(&report.status);
    record.iterations = report.iterations;
    record.cpu_seconds = report.wall_seconds;
    record.final_residual = report.final_residual_norm;
    let failure = match &report.status {
        SolveStatus::EvaluationFailure { iteration, error } => Some(format!("iteration {iteration}: {error}")),
        _ => None,
    };

    let history = record_history.then(|| {
        let traced = SolveOptions {
            record_history: true,
            reference,
            clock: &clock,
        };
        solve(system, x0, method, stop, &traced)
            .map(|r| r.history)
            .unwrap_or_default()
    });
    RunOutput {
        record,
        history,
        failure,
    }
}

/// Solution of `problem` by the adaptive momentum method with both
/// tolerances tightened by `1e-4`; `None` if that solve does not converge.
pub fn reference_solution(problem: &Problem, kind: ProblemKind, stop: &StoppingConfig) -> Option<Vec<f64>> {
    let config = MethodConfig::new(Method::Abnkam).with_theta(default_theta(kind, Method::Abnkam));
    let tight = StoppingConfig {
        tau_a: stop.tau_a * 1e-4,
        tau_r: stop.tau_r * 1e-4,
        ..*stop
    };
    let report = solve(&problem.system, &problem.x0, &config, &tight, &SolveOptions::default()).ok()?;
    report.converged().then_some(report.solution)
}

type ProblemKey = (ProblemKind, usize, u64, bool);

fn problem_key(spec: &ProblemSpec) -> ProblemKey {
    (spec.kind, spec.m, spec.c.to_bits(), spec.allow_large)
}

/// Executes every cell and returns the outputs in grid order.
///
/// Invalid cells (bad dimensions, parameters out of range) reject the whole
/// grid up front; failures during a solve only mark that cell.
pub fn run_suite(cells: &[Cell], options: &SuiteOptions) -> Result<Vec<RunOutput>> {
    if cells.is_empty() {
        return Err(BenchError::EmptyGrid);
    }
    let mut problems: HashMap<ProblemKey, Problem> = HashMap::new();
    for cell in cells {
        cell.method.validate()?;
        cell.stop.validate()?;
        if let Entry::Vacant(slot) = problems.entry(problem_key(&cell.problem)) {
            slot.insert(make_problem(&cell.problem)?);
        }
    }

    let mut references: HashMap<ProblemKey, Option<Vec<f64>>> = HashMap::new();
    if options.reference {
        for cell in cells {
            let key = problem_key(&cell.problem);
            references
                .entry(key)
                .or_insert_with(|| reference_solution(&problems[&key], cell.problem.kind, &cell.stop));
        }
    }

    let run = |cell: &Cell| {
        let key = problem_key(&cell.problem);
        let problem = &problems[&key];
        let reference = references.get(&key).and_then(|r| r.as_deref());
        run_case(
            cell.problem.kind.name(),
            &problem.system,
            &problem.x0,
            &cell.method,
            &cell.stop,
            reference,
            options.record_history,
        )
    };
    let outputs = if options.parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    };
    Ok(outputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        assert_eq!(default_theta(ProblemKind::ChandrasekharH, Method::Abnkam), 0.1);
        assert_eq!(default_theta(ProblemKind::ChandrasekharH, Method::Mrbnk), 0.1);
        assert_eq!(default_theta(ProblemKind::ChandrasekharH, Method::Rbcnk), 0.5);
        assert_eq!(default_theta(ProblemKind::ModifiedRosenbrock, Method::Abnkam), 0.5);
        assert_eq!(default_theta(ProblemKind::ExtendedPowellBadlyScaled, Method::Ngrkm), 0.5);
    }

    #[test]
    fn status_names_round_trip() {
        for status in [RunStatus::Converged, RunStatus::MaxIterations, RunStatus::EvaluationFailure] {
            assert_eq!(status.name().parse::<RunStatus>().unwrap(), status);
        }
        assert!("done".parse::<RunStatus>().is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(matches!(run_suite(&[], &SuiteOptions::default()), Err(BenchError::EmptyGrid)));
    }

    #[test]
    fn invalid_cell_rejects_the_grid() {
        let bad = Cell::new(ProblemSpec::new(ProblemKind::ExtendedCraggLevy, 10), Method::Abnkam);
        assert!(matches!(
            run_suite(&[bad], &SuiteOptions::default()),
            Err(BenchError::Solver(nlk_core::Error::InvalidDimension { .. }))
        ));
    }
}
