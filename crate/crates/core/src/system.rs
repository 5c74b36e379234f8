//! The matrix-free nonlinear system abstraction.
//!
//! A system exposes its residual `F(x)` component by component and the
//! gradient `∇F_i(x)` of a single component as a [`SparseRow`]. Solvers never
//! materialize the full Jacobian; block operations gather rows on demand.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vector::all_finite;

/// One Jacobian row stored as strictly increasing `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
    dim: usize,
}

impl SparseRow {
    pub fn new(dim: usize) -> Self {
        Self {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            indices: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
            dim,
        }
    }

    /// Builds a row from parallel index/value lists, validating the ordering.
    pub fn from_parts(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        for (pos, &j) in indices.iter().enumerate() {
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, len: dim });
            }
            if pos > 0 && indices[pos - 1] >= j {
                return Err(Error::InvalidConfig("sparse row indices must be strictly increasing"));
            }
        }
        if !all_finite(&values) {
            return Err(Error::NonFiniteValue { row: None });
        }
        Ok(Self {
            indices,
            values,
            dim,
        })
    }

    /// Dense row with every column present.
    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            indices: (0..values.len()).collect(),
            values: values.to_vec(),
            dim: values.len(),
        }
    }

    /// Empties the row and resets its ambient dimension.
    pub fn reset(&mut self, dim: usize) {
        self.indices.clear();
        self.values.clear();
        self.dim = dim;
    }

    /// Appends an entry. Columns must be pushed in strictly increasing order.
    #[inline]
    pub fn push(&mut self, index: usize, value: f64) {
        debug_assert!(index < self.dim);
        debug_assert!(self.indices.last().is_none_or(|&last| last < index));
        self.indices.push(index);
        self.values.push(value);
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// `<row, x>` for a dense `x`.
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.iter().map(|(j, v)| v * x[j]).sum()
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `y += alpha * row`
    #[inline]
    pub fn scatter_add(&self, alpha: f64, y: &mut [f64]) {
        for (j, v) in self.iter() {
            y[j] += alpha * v;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.values)
    }
}

/// A nonlinear map `F: R^n -> R^m` with per-row gradients.
///
/// Implementations must be pure: identical inputs give bitwise identical
/// outputs, and evaluation never mutates shared state. The `*_unchecked`
/// style methods below receive inputs of the right size; the free functions
/// in this module do the validation.
pub trait NonlinearSystem: Send + Sync {
    /// Number of equations `m`.
    fn equations(&self) -> usize;

    /// Number of unknowns `n`.
    fn unknowns(&self) -> usize;

    /// `F_i(x)`.
    fn component(&self, i: usize, x: &[f64]) -> f64;

    /// Writes `∇F_i(x)` into `row` (which is reset first).
    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow);

    /// Writes the full residual `F(x)` into `out`.
    fn residual_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, fi) in out.iter_mut().enumerate() {
            *fi = self.component(i, x);
        }
    }

    /// Gathers the gradients of the rows in `rows`, in order.
    fn block_into(&self, rows: &[usize], x: &[f64], out: &mut Vec<SparseRow>) {
        out.resize_with(rows.len(), SparseRow::default);
        for (slot, &i) in out.iter_mut().zip(rows) {
            self.gradient_into(i, x, slot);
        }
    }
}

fn check_point<S: NonlinearSystem + ?Sized>(system: &S, x: &[f64]) -> Result<()> {
    if x.len() != system.unknowns() {
        return Err(Error::DimensionMismatch {
            expected: system.unknowns(),
            found: x.len(),
        });
    }
    if !all_finite(x) {
        return Err(Error::NonFiniteValue { row: None });
    }
    Ok(())
}

fn check_row<S: NonlinearSystem + ?Sized>(system: &S, i: usize) -> Result<()> {
    if i >= system.equations() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: system.equations(),
        });
    }
    Ok(())
}

/// Evaluates `F(x)` in place, reporting the first non-finite component.
pub fn residual_checked<S: NonlinearSystem + ?Sized>(
    system: &S,
    x: &[f64],
    out: &mut [f64],
) -> Result<()> {
    check_point(system, x)?;
    if out.len() != system.equations() {
        return Err(Error::DimensionMismatch {
            expected: system.equations(),
            found: out.len(),
        });
    }
    system.residual_into(x, out);
    match out.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(Error::NonFiniteValue { row: Some(row) }),
        None => Ok(()),
    }
}

/// `F(x)` as a freshly allocated vector.
pub fn residual<S: NonlinearSystem + ?Sized>(system: &S, x: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; system.equations()];
    residual_checked(system, x, &mut out)?;
    Ok(out)
}

/// `∇F_i(x)` as a sparse row.
pub fn jacobian_row<S: NonlinearSystem + ?Sized>(
    system: &S,
    i: usize,
    x: &[f64],
) -> Result<SparseRow> {
    check_row(system, i)?;
    check_point(system, x)?;
    let mut row = SparseRow::new(system.unknowns());
    system.gradient_into(i, x, &mut row);
    if !row.is_finite() {
        return Err(Error::NonFiniteValue { row: Some(i) });
    }
    Ok(row)
}

/// The sub-Jacobian `F'_J(x)`, one sparse row per entry of `rows`.
pub fn jacobian_block<S: NonlinearSystem + ?Sized>(
    system: &S,
    rows: &[usize],
    x: &[f64],
) -> Result<Vec<SparseRow>> {
    if rows.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    for &i in rows {
        check_row(system, i)?;
    }
    check_point(system, x)?;
    let mut out = Vec::with_capacity(rows.len());
    system.block_into(rows, x, &mut out);
    for (row, &i) in out.iter().zip(rows) {
        if !row.is_finite() {
            return Err(Error::NonFiniteValue { row: Some(i) });
        }
    }
    Ok(out)
}

/// Central-difference approximation of `∇F_i(x)` as a dense row.
///
/// Column `j` uses the step `h * max(1, |x_j|)`.
pub fn fd_jacobian_row<S: NonlinearSystem + ?Sized>(
    system: &S,
    i: usize,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    check_row(system, i)?;
    check_point(system, x)?;
    let mut probe = x.to_vec();
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() {
        let step = h * f64::max(1.0, x[j].abs());
        probe[j] = x[j] + step;
        let plus = system.component(i, &probe);
        probe[j] = x[j] - step;
        let minus = system.component(i, &probe);
        probe[j] = x[j];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteValue { row: Some(i) });
        }
        out[j] = (plus - minus) / (2.0 * step);
    }
    Ok(out)
}
