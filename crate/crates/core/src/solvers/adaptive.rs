use alloc::vec;
use alloc::vec::Vec;

use super::WeightMode;
use crate::error::{Error, Result};
use crate::system::{NonlinearSystem, SparseRow};
use crate::vector::{dot, norm_sq, scale};

/// Momentum-branch parameters from the two-dimensional projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub alpha: f64,
    pub beta: f64,
    /// `||d||^2 ||Δx||^2 - <d, Δx>^2`.
    pub delta: f64,
    /// Linearized estimate of `<d, x_k - x_*>`.
    pub s: f64,
}

/// Step size and momentum that project (the linearization of) the solution
/// onto `x_k + span{d, Δx}`, with `Δx = x_k - x_{k-1}`:
///
/// `alpha = ||Δx||^2 s / Δ`, `beta = <Δx, d> s / Δ`.
///
/// When `Δ` is not strictly positive the divisions are skipped and both
/// parameters are returned as zero; the caller is expected to compare `Δ`
/// against its guard before using them.
pub fn adaptive_params(d: &[f64], dx: &[f64], s: f64) -> AdaptiveParams {
    let dd = norm_sq(d);
    let xx = norm_sq(dx);
    let dxd = dot(dx, d);
    let delta = dd * xx - dxd * dxd;
    let (alpha, beta) = if delta > 0.0 {
        (xx * s / delta, dxd * s / delta)
    } else {
        (0.0, 0.0)
    };
    AdaptiveParams { alpha, beta, delta, s }
}

/// `sin^2` of the angle between `d` and `Δx`, clamped to `[0, 1]`.
pub fn momentum_angle(params: &AdaptiveParams, d: &[f64], dx: &[f64]) -> f64 {
    let scale = norm_sq(d) * norm_sq(dx);
    if scale > 0.0 {
        (params.delta / scale).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Weighted block direction and its companion scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockQuantities {
    /// `d = Σ_J w_i F_i / ||∇F_i||^2 ∇F_i`.
    pub d: Vec<f64>,
    /// `s = Σ_J w_i F_i^2 / ||∇F_i||^2`.
    pub s: f64,
    /// `||F_J||^2`.
    pub block_residual_norm_sq: f64,
    /// `Σ_J ||∇F_i||^2`, the squared Frobenius norm of `F'_J`.
    pub gradient_norm_sq: f64,
}

/// Accumulates the averaged block direction row by row, without forming
/// the sub-Jacobian.
///
/// `residual` must hold `F(x)`. With natural weights this is
/// `d = (F'_J)^T F_J / ||F'_J||_F^2` and `s = ||F_J||^2 / ||F'_J||_F^2`.
pub fn block_quantities<S: NonlinearSystem + ?Sized>(
    system: &S,
    rows: &[usize],
    x: &[f64],
    residual: &[f64],
    weights: WeightMode,
) -> Result<BlockQuantities> {
    if rows.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let n = system.unknowns();
    let uniform = 1.0 / rows.len() as f64;
    let mut d = vec![0.0; n];
    let mut s = 0.0;
    let mut block_residual_norm_sq = 0.0;
    let mut gradient_norm_sq = 0.0;
    let mut grad = SparseRow::new(n);
    for &i in rows {
        if i >= residual.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: residual.len(),
            });
        }
        system.gradient_into(i, x, &mut grad);
        if !grad.is_finite() {
            return Err(Error::NonFiniteValue { row: Some(i) });
        }
        let g2 = grad.norm_sq();
        if g2 == 0.0 {
            return Err(Error::ZeroGradientRow { row: i });
        }
        let fi = residual[i];
        block_residual_norm_sq += fi * fi;
        gradient_norm_sq += g2;
        match weights {
            WeightMode::Natural => grad.scatter_add(fi, &mut d),
            WeightMode::Uniform => {
                grad.scatter_add(uniform * fi / g2, &mut d);
                s += uniform * fi * fi / g2;
            }
        }
    }
    if weights == WeightMode::Natural {
        scale(1.0 / gradient_norm_sq, &mut d);
        s = block_residual_norm_sq / gradient_norm_sq;
    }
    Ok(BlockQuantities {
        d,
        s,
        block_residual_norm_sq,
        gradient_norm_sq,
    })
}
