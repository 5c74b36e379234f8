//! Nonlinear Kaczmarz solvers for large systems `F(x) = 0`.
//!
//! The centerpiece is the averaged block nonlinear Kaczmarz method with
//! adaptive momentum ([`Method::Abnkam`]): each iteration averages the
//! single-row projections over a greedy block of rows and then chooses the
//! step size and heavy-ball momentum in closed form, by projecting onto the
//! plane spanned by the block direction and the previous displacement. Row
//! methods, pseudoinverse block methods and the momentum-free averaged
//! method are provided alongside for comparison.
//!
//! The crate is `no_std` (with `alloc`). Systems are matrix-free: they
//! expose residual components and sparse gradient rows through
//! [`NonlinearSystem`]. Timing is injected through [`Clock`].
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod lsqr;
pub mod problems;
pub mod selection;
pub mod solvers;
pub mod stopping;
pub mod system;
pub mod vector;

pub use error::{Error, Result};
pub use lsqr::{lsqr_solve, DenseOperator, LinearOperator, LsqrConfig, LsqrOutcome, LsqrStop, RowBlock};
pub use problems::{make_linear_problem, make_problem, BenchmarkSystem, LinearSystem, Problem, ProblemKind, ProblemSpec};
pub use selection::{capped_set, greedy_threshold_set, max_residual_index, sample_index, IndexSet, SelectionRule};
pub use solvers::{
    adaptive_params, block_quantities, momentum_angle, solve, AdaptiveParams, BlockQuantities, Branch, Clock,
    IterationRecord, IterationState, Method, MethodConfig, NoClock, SolveOptions, SolveReport, SolveStatus,
    StepRecord, Stepper, WeightMode,
};
pub use stopping::{should_stop, stop_decision, StopDecision, StoppingConfig};
pub use system::{fd_jacobian_row, jacobian_block, jacobian_row, residual, NonlinearSystem, SparseRow};
