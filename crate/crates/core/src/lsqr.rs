//! LSQR over abstract linear operators.
//!
//! Golub–Kahan bidiagonalization with Givens-rotation updates (Paige and
//! Saunders, no damping). Started from zero, the iterates stay in the row
//! space of `A`, so the limit is the minimum-norm least-squares solution
//! `A^+ b`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::system::SparseRow;
use crate::vector::{all_finite, axpy, norm, scale};

/// A linear map `R^cols -> R^rows` with its adjoint.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = A^T y`
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);
}

/// Stacked sparse rows viewed as an operator, e.g. a sub-Jacobian `F'_J(x)`.
#[derive(Debug, Clone, Copy)]
pub struct RowBlock<'a> {
    rows: &'a [SparseRow],
    cols: usize,
}

impl<'a> RowBlock<'a> {
    pub fn new(rows: &'a [SparseRow], cols: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.dim() == cols));
        Self { rows, cols }
    }
}

impl LinearOperator for RowBlock<'_> {
    fn rows(&self) -> usize {
        self.rows.len()
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(self.rows) {
            *yi = row.dot(x);
        }
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (yi, row) in y.iter().zip(self.rows) {
            row.scatter_add(*yi, x);
        }
    }
}

/// Row-major dense matrix operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl DenseOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { data, rows, cols })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = crate::vector::dot(self.row(i), x);
        }
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, self.row(i), x);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqrConfig {
    pub atol: f64,
    pub btol: f64,
    /// Inner iteration cap; `None` means `2 * (rows + cols)`.
    pub max_inner: Option<usize>,
}

impl Default for LsqrConfig {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            btol: 1e-10,
            max_inner: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsqrStop {
    /// One of the atol/btol stopping tests was satisfied.
    AtolBtolMet,
    /// The inner iteration budget ran out first.
    MaxInner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqrOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Estimate of `||A v - b|| / ||b||` (zero when `b = 0`).
    pub relative_residual: f64,
    pub stop: LsqrStop,
}

/// Approximates `A^+ b` by LSQR.
pub fn lsqr_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    config: &LsqrConfig,
) -> Result<LsqrOutcome> {
    let (p, n) = (op.rows(), op.cols());
    if b.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: b.len(),
        });
    }
    if !(config.atol > 0.0 && config.btol > 0.0) {
        return Err(Error::InvalidConfig("lsqr tolerances must be positive"));
    }
    let max_inner = config.max_inner.unwrap_or(2 * (p + n));

    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    let bnorm = beta;
    let mut v = vec![0.0; n];
    let mut alpha = 0.0;
    if beta > 0.0 {
        scale(1.0 / beta, &mut u);
        op.apply_adjoint(&u, &mut v);
        alpha = norm(&v);
    }
    if alpha > 0.0 {
        scale(1.0 / alpha, &mut v);
    }
    if alpha * beta == 0.0 {
        // b = 0, or b is orthogonal to the range of A: x = 0 is the answer.
        return Ok(LsqrOutcome {
            solution: x,
            iterations: 0,
            relative_residual: if bnorm > 0.0 { 1.0 } else { 0.0 },
            stop: LsqrStop::AtolBtolMet,
        });
    }

    let mut w = v.clone();
    let mut av = vec![0.0; p];
    let mut atu = vec![0.0; n];
    let mut rhobar = alpha;
    let mut phibar = beta;
    let mut anorm_sq = 0.0;
    let mut rnorm = beta;
    let mut iterations = 0;
    let mut stop = LsqrStop::MaxInner;

    while iterations < max_inner {
        iterations += 1;

        // Continue the bidiagonalization.
        op.apply(&v, &mut av);
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm(&u);
        anorm_sq += alpha * alpha + beta * beta;
        if beta > 0.0 {
            scale(1.0 / beta, &mut u);
            op.apply_adjoint(&u, &mut atu);
            for (vi, atui) in v.iter_mut().zip(&atu) {
                *vi = atui - beta * *vi;
            }
            alpha = norm(&v);
            if alpha > 0.0 {
                scale(1.0 / alpha, &mut v);
            }
        } else {
            alpha = 0.0;
        }

        // Plane rotation eliminating the subdiagonal beta.
        let rho = libm::hypot(rhobar, beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        let tau = s * phi;

        axpy(phi / rho, &w, &mut x);
        let t2 = -theta / rho;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = vi + t2 * *wi;
        }

        if !phibar.is_finite() || !rho.is_finite() || !all_finite(&x) {
            return Err(Error::NonFiniteValue { row: None });
        }

        rnorm = phibar;
        let arnorm = alpha * tau.abs();
        let anorm = libm::sqrt(anorm_sq);
        let xnorm = norm(&x);
        let test1 = rnorm / bnorm;
        let test2 = arnorm / (anorm * rnorm + f64::EPSILON);
        let rtol = config.btol + config.atol * anorm * xnorm / bnorm;
        if test1 <= rtol || test2 <= config.atol || alpha == 0.0 || beta == 0.0 {
            stop = LsqrStop::AtolBtolMet;
            break;
        }
    }

    Ok(LsqrOutcome {
        solution: x,
        iterations,
        relative_residual: rnorm / bnorm,
        stop,
    })
}
