use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adaptive::{adaptive_params, block_quantities, momentum_angle, BlockQuantities};
use super::{IterationState, Method, MethodConfig};
use crate::error::{Error, Result};
use crate::lsqr::{lsqr_solve, LsqrConfig, LsqrStop, RowBlock};
use crate::selection::{capped_set, greedy_threshold_set, sample_index, IndexSet, SelectionRule};
use crate::system::{NonlinearSystem, SparseRow};
use crate::vector::{all_finite, axpy, norm_sq};

/// Which update formula produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Adaptive step size and momentum.
    Momentum,
    /// Single-parameter extrapolated step `x - (s / ||d||^2) d`.
    Fallback,
    /// Fallback taken because `x_k == x_{k-1}` despite a nonzero residual.
    Stalled,
    /// Constant step size and momentum on the averaged block direction.
    Constant,
    /// Single-row projection, possibly relaxed and with momentum.
    Row,
    /// Pseudoinverse block step through LSQR.
    Pseudoinverse,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Self::Momentum => "momentum",
            Self::Fallback => "fallback",
            Self::Stalled => "stalled",
            Self::Constant => "constant",
            Self::Row => "row",
            Self::Pseudoinverse => "pseudoinverse",
        }
    }
}

/// Diagnostics of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub branch: Branch,
    /// Step size actually applied to the step direction.
    pub alpha: Option<f64>,
    /// Momentum coefficient actually applied.
    pub beta: Option<f64>,
    /// Momentum guard quantity `Δ_k` for the direction `(F'_J)^T F_J`.
    pub delta: Option<f64>,
    /// `sin^2` of the angle between `d_k` and `x_k - x_{k-1}`.
    pub sin2_angle: Option<f64>,
    pub block_size: usize,
    /// The LSQR inner solve ran out of iterations.
    pub lsqr_capped: bool,
}

impl StepRecord {
    fn new(branch: Branch, block_size: usize) -> Self {
        Self {
            branch,
            alpha: None,
            beta: None,
            delta: None,
            sin2_angle: None,
            block_size,
            lsqr_capped: false,
        }
    }
}

/// Applies one configured update rule at a time.
///
/// Holds the per-solve mutable pieces: the random stream, the cyclic row
/// cursor and scratch buffers for gathered Jacobian rows.
pub struct Stepper<'a, S: NonlinearSystem + ?Sized> {
    system: &'a S,
    config: MethodConfig,
    rng: ChaCha8Rng,
    row: SparseRow,
    block: Vec<SparseRow>,
}

impl<'a, S: NonlinearSystem + ?Sized> Stepper<'a, S> {
    pub fn new(system: &'a S, config: MethodConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            system,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            row: SparseRow::new(system.unknowns()),
            block: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    /// One iteration of the configured method.
    pub fn step(&mut self, state: &mut IterationState) -> Result<StepRecord> {
        let cfg = self.config;
        match cfg.method {
            Method::Abnkam => self.abnkam_step(state),
            Method::AbnkamIdeal => self.abnkam_ideal_step(state),
            Method::Abnk2 => self.abnk2_step(state),
            Method::AbnkmConst => self.abnkm_const_step(state),
            Method::Nk => {
                let i = state.k % self.system.equations();
                self.row_step(state, i, 1.0, 0.0)
            }
            Method::Nurk => {
                let i = sample_index(&state.residual, SelectionRule::UniformRandom, &mut self.rng)?;
                self.row_step(state, i, 1.0, 0.0)
            }
            Method::Mrnk => {
                let i = sample_index(&state.residual, SelectionRule::MaxResidual, &mut self.rng)?;
                self.row_step(state, i, 1.0, 0.0)
            }
            Method::Ngrk | Method::Ngrkm => {
                let rule = SelectionRule::GreedyRandomized(cfg.theta);
                let i = sample_index(&state.residual, rule, &mut self.rng)?;
                let beta = if cfg.method == Method::Ngrkm { cfg.beta } else { 0.0 };
                self.row_step(state, i, cfg.alpha, beta)
            }
            Method::Mrbnk => {
                let set = greedy_threshold_set(&state.residual, cfg.theta)?;
                self.block_pseudoinverse_step(state, &set, &cfg.lsqr)
            }
            Method::Rbcnk => {
                let set = capped_set(&state.residual, cfg.theta)?;
                self.block_pseudoinverse_step(state, &set, &cfg.lsqr)
            }
        }
    }

    fn greedy_block(&self, state: &IterationState) -> Result<(IndexSet, BlockQuantities)> {
        let set = greedy_threshold_set(&state.residual, self.config.theta)?;
        let q = block_quantities(
            self.system,
            set.as_slice(),
            &state.x,
            &state.residual,
            self.config.weights,
        )?;
        Ok((set, q))
    }

    /// Hybrid adaptive-momentum step: momentum when `|Δ_k| >= ε` and
    /// `β_k ∈ (0, β_max)`, otherwise the extrapolated fallback.
    ///
    /// `Δ_k` is measured on the unnormalized direction `(F'_J)^T F_J`, i.e.
    /// the Gram determinant of `d` and `Δx` times `||F'_J||_F^4`.
    pub fn abnkam_step(&mut self, state: &mut IterationState) -> Result<StepRecord> {
        let (set, q) = self.greedy_block(state)?;
        let cfg = self.config;
        self.adaptive_update(state, &q, set.len(), |delta, beta| {
            delta.abs() >= cfg.epsilon && beta > 0.0 && beta < cfg.beta_max
        })
    }

    /// Adaptive-momentum step without the `β` truncation: momentum whenever
    /// `|Δ_k| >= ε`.
    pub fn abnkam_ideal_step(&mut self, state: &mut IterationState) -> Result<StepRecord> {
        let (set, q) = self.greedy_block(state)?;
        let eps = self.config.epsilon;
        self.adaptive_update(state, &q, set.len(), |delta, _| delta.abs() >= eps)
    }

    fn adaptive_update(
        &mut self,
        state: &mut IterationState,
        q: &BlockQuantities,
        block_size: usize,
        accept: impl Fn(f64, f64) -> bool,
    ) -> Result<StepRecord> {
        let Some(prev) = state.x_prev.as_ref() else {
            return self.fallback_update(state, q, StepRecord::new(Branch::Fallback, block_size));
        };
        let dx: Vec<f64> = state.x.iter().zip(prev).map(|(a, b)| a - b).collect();
        let params = adaptive_params(&q.d, &dx, q.s);
        let stalled = norm_sq(&dx) == 0.0;
        let mut record = StepRecord::new(if stalled { Branch::Stalled } else { Branch::Fallback }, block_size);
        let guard_delta = params.delta * q.gradient_norm_sq * q.gradient_norm_sq;
        record.delta = Some(guard_delta);
        if !stalled && norm_sq(&q.d) > 0.0 {
            record.sin2_angle = Some(momentum_angle(&params, &q.d, &dx));
        }
        // β is out of range by declaration when Δ is below the guard, so
        // the division result is never consulted in that case.
        if !stalled && params.delta > 0.0 && accept(guard_delta, params.beta) {
            record.branch = Branch::Momentum;
            record.alpha = Some(params.alpha);
            record.beta = Some(params.beta);
            let mut x_next = state.x.clone();
            axpy(-params.alpha, &q.d, &mut x_next);
            axpy(params.beta, &dx, &mut x_next);
            self.commit(state, x_next)?;
            return Ok(record);
        }
        self.fallback_update(state, q, record)
    }

    fn fallback_update(
        &mut self,
        state: &mut IterationState,
        q: &BlockQuantities,
        mut record: StepRecord,
    ) -> Result<StepRecord> {
        let dd = norm_sq(&q.d);
        if dd == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let alpha = q.s / dd;
        record.alpha = Some(alpha);
        record.beta = Some(0.0);
        let mut x_next = state.x.clone();
        axpy(-alpha, &q.d, &mut x_next);
        self.commit(state, x_next)?;
        Ok(record)
    }

    /// Averaged block step with the extrapolated step size and no momentum:
    /// `x - ||F_J||^2 / ||(F'_J)^T F_J||^2 (F'_J)^T F_J`.
    pub fn abnk2_step(&mut self, state: &mut IterationState) -> Result<StepRecord> {
        let (set, q) = self.greedy_block(state)?;
        self.fallback_update(state, &q, StepRecord::new(Branch::Fallback, set.len()))
    }

    /// `x - α d + β (x_k - x_{k-1})` with constant `α`, `β`.
    pub fn abnkm_const_step(&mut self, state: &mut IterationState) -> Result<StepRecord> {
        let (set, q) = self.greedy_block(state)?;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let mut record = StepRecord::new(Branch::Constant, set.len());
        record.alpha = Some(alpha);
        let mut x_next = state.x.clone();
        axpy(-alpha, &q.d, &mut x_next);
        if let Some(prev) = &state.x_prev {
            record.beta = Some(beta);
            for ((xn, x), p) in x_next.iter_mut().zip(&state.x).zip(prev) {
                *xn += beta * (x - p);
            }
        } else {
            record.beta = Some(0.0);
        }
        self.commit(state, x_next)?;
        Ok(record)
    }

    /// `x - α F_i / ||∇F_i||^2 ∇F_i + β (x_k - x_{k-1})`.
    ///
    /// A row with zero residual contributes no projection.
    pub fn row_step(
        &mut self,
        state: &mut IterationState,
        i: usize,
        alpha: f64,
        beta: f64,
    ) -> Result<StepRecord> {
        if i >= self.system.equations() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.system.equations(),
            });
        }
        let fi = state.residual[i];
        let mut x_next = state.x.clone();
        if fi != 0.0 {
            self.system.gradient_into(i, &state.x, &mut self.row);
            if !self.row.is_finite() {
                return Err(Error::NonFiniteValue { row: Some(i) });
            }
            let g2 = self.row.norm_sq();
            if g2 == 0.0 {
                return Err(Error::ZeroGradientRow { row: i });
            }
            self.row.scatter_add(-alpha * fi / g2, &mut x_next);
        }
        let mut record = StepRecord::new(Branch::Row, 1);
        record.alpha = Some(alpha);
        record.beta = Some(0.0);
        if let Some(prev) = &state.x_prev {
            if beta != 0.0 {
                record.beta = Some(beta);
                for ((xn, x), p) in x_next.iter_mut().zip(&state.x).zip(prev) {
                    *xn += beta * (x - p);
                }
            }
        }
        self.commit(state, x_next)?;
        Ok(record)
    }

    /// `x - (F'_J)^+ F_J`, with the pseudoinverse applied by LSQR.
    ///
    /// An exhausted inner budget still applies the best available step and
    /// is flagged in the record.
    pub fn block_pseudoinverse_step(
        &mut self,
        state: &mut IterationState,
        set: &IndexSet,
        lsqr: &LsqrConfig,
    ) -> Result<StepRecord> {
        let rows = set.as_slice();
        if rows.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.system.equations()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.system.equations(),
            });
        }
        self.system.block_into(rows, &state.x, &mut self.block);
        if let Some(pos) = self.block.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFiniteValue { row: Some(rows[pos]) });
        }
        if self.block.iter().all(|r| r.norm_sq() == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let rhs: Vec<f64> = rows.iter().map(|&i| state.residual[i]).collect();
        let op = RowBlock::new(&self.block, self.system.unknowns());
        let outcome = lsqr_solve(&op, &rhs, lsqr)?;
        let mut record = StepRecord::new(Branch::Pseudoinverse, rows.len());
        record.alpha = Some(1.0);
        record.lsqr_capped = outcome.stop == LsqrStop::MaxInner;
        let mut x_next = state.x.clone();
        axpy(-1.0, &outcome.solution, &mut x_next);
        self.commit(state, x_next)?;
        Ok(record)
    }

    fn commit(&self, state: &mut IterationState, x_next: Vec<f64>) -> Result<()> {
        if !all_finite(&x_next) {
            return Err(Error::NonFiniteValue { row: None });
        }
        state.advance(self.system, x_next)
    }
}
