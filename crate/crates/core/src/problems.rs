//! Benchmark nonlinear systems and synthetic linear systems.
//!
//! Component formulas use 1-based positions `k` with period tests on
//! `k mod p`; rows are stored 0-based, so row `i` corresponds to `k = i + 1`.
//! All five benchmark systems are square (`n = m`).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{exp, tan};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lsqr::{DenseOperator, LinearOperator};
use crate::system::{NonlinearSystem, SparseRow};
use crate::vector::{dot, norm};

/// Largest H-equation size built without the explicit override.
pub const DENSE_SIZE_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    ModifiedRosenbrock,
    ExtendedCraggLevy,
    ChandrasekharH,
    AugmentedRosenbrock,
    ExtendedPowellBadlyScaled,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        Self::ModifiedRosenbrock,
        Self::ExtendedCraggLevy,
        Self::ChandrasekharH,
        Self::AugmentedRosenbrock,
        Self::ExtendedPowellBadlyScaled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ModifiedRosenbrock => "modified_rosenbrock",
            Self::ExtendedCraggLevy => "extended_cragg_levy",
            Self::ChandrasekharH => "chandrasekhar_h",
            Self::AugmentedRosenbrock => "augmented_rosenbrock",
            Self::ExtendedPowellBadlyScaled => "extended_powell",
        }
    }

    /// Component period: `m` must be a multiple of it.
    pub fn period(self) -> usize {
        match self {
            Self::ModifiedRosenbrock | Self::ExtendedPowellBadlyScaled => 2,
            Self::ExtendedCraggLevy | Self::AugmentedRosenbrock => 4,
            Self::ChandrasekharH => 1,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "modified_rosenbrock" | "mr" => Self::ModifiedRosenbrock,
            "extended_cragg_levy" | "cragg_levy" | "ecl" => Self::ExtendedCraggLevy,
            "chandrasekhar_h" | "h_equation" | "chandrasekhar" => Self::ChandrasekharH,
            "augmented_rosenbrock" | "ar" => Self::AugmentedRosenbrock,
            "extended_powell" | "extended_powell_badly_scaled" | "powell" => {
                Self::ExtendedPowellBadlyScaled
            }
            _ => return Err(Error::InvalidConfig("unknown problem name")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub m: usize,
    /// H-equation albedo parameter.
    pub c: f64,
    /// Lifts [`DENSE_SIZE_CAP`] for the dense H-equation.
    pub allow_large: bool,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, m: usize) -> Self {
        Self {
            kind,
            m,
            c: 0.9,
            allow_large: false,
        }
    }
}

/// A constructed benchmark system and its prescribed starting point.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: BenchmarkSystem,
    pub x0: Vec<f64>,
}

/// Builds one of the benchmark systems with its starting point.
pub fn make_problem(spec: &ProblemSpec) -> Result<Problem> {
    let kind = spec.kind;
    let m = spec.m;
    if m == 0 || !m.is_multiple_of(kind.period()) {
        return Err(Error::InvalidDimension {
            problem: kind.name(),
            m,
            period: kind.period(),
        });
    }
    let (system, x0) = match kind {
        ProblemKind::ModifiedRosenbrock => (
            BenchmarkSystem::ModifiedRosenbrock(ModifiedRosenbrock { m }),
            pattern(m, &[-1.8, -1.0]),
        ),
        ProblemKind::ExtendedCraggLevy => (
            BenchmarkSystem::ExtendedCraggLevy(ExtendedCraggLevy { m }),
            pattern(m, &[1.0, 2.0, 2.0, 2.0]),
        ),
        ProblemKind::ChandrasekharH => {
            if m > DENSE_SIZE_CAP && !spec.allow_large {
                return Err(Error::ProblemTooLarge {
                    m,
                    cap: DENSE_SIZE_CAP,
                });
            }
            if !spec.c.is_finite() {
                return Err(Error::InvalidConfig("H-equation parameter c must be finite"));
            }
            (
                BenchmarkSystem::ChandrasekharH(ChandrasekharH::new(m, spec.c)),
                vec![0.0; m],
            )
        }
        ProblemKind::AugmentedRosenbrock => (
            BenchmarkSystem::AugmentedRosenbrock(AugmentedRosenbrock { m }),
            pattern(m, &[-1.2, 1.0, -1.0, 20.0]),
        ),
        ProblemKind::ExtendedPowellBadlyScaled => (
            BenchmarkSystem::ExtendedPowell(ExtendedPowell { m }),
            pattern(m, &[0.0, 1.0]),
        ),
    };
    Ok(Problem { system, x0 })
}

fn pattern(m: usize, period: &[f64]) -> Vec<f64> {
    period.iter().copied().cycle().take(m).collect()
}

/// Closed set of benchmark systems, dispatched without boxing.
#[derive(Debug, Clone)]
pub enum BenchmarkSystem {
    ModifiedRosenbrock(ModifiedRosenbrock),
    ExtendedCraggLevy(ExtendedCraggLevy),
    ChandrasekharH(ChandrasekharH),
    AugmentedRosenbrock(AugmentedRosenbrock),
    ExtendedPowell(ExtendedPowell),
}

macro_rules! dispatch {
    ($self:ident, $inner:ident => $body:expr) => {
        match $self {
            BenchmarkSystem::ModifiedRosenbrock($inner) => $body,
            BenchmarkSystem::ExtendedCraggLevy($inner) => $body,
            BenchmarkSystem::ChandrasekharH($inner) => $body,
            BenchmarkSystem::AugmentedRosenbrock($inner) => $body,
            BenchmarkSystem::ExtendedPowell($inner) => $body,
        }
    };
}

impl NonlinearSystem for BenchmarkSystem {
    fn equations(&self) -> usize {
        dispatch!(self, s => s.equations())
    }

    fn unknowns(&self) -> usize {
        dispatch!(self, s => s.unknowns())
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        dispatch!(self, s => s.component(i, x))
    }

    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow) {
        dispatch!(self, s => s.gradient_into(i, x, row))
    }

    fn residual_into(&self, x: &[f64], out: &mut [f64]) {
        dispatch!(self, s => s.residual_into(x, out))
    }

    fn block_into(&self, rows: &[usize], x: &[f64], out: &mut Vec<SparseRow>) {
        dispatch!(self, s => s.block_into(rows, x, out))
    }
}

fn logistic(v: f64) -> f64 {
    1.0 / (1.0 + exp(-v))
}

/// `F_k = 1/(1+e^{-x_k}) - 0.73` for odd `k`, `F_k = 10(x_k - x_{k-1}^2)` for even `k`.
#[derive(Debug, Clone, Copy)]
pub struct ModifiedRosenbrock {
    m: usize,
}

impl NonlinearSystem for ModifiedRosenbrock {
    fn equations(&self) -> usize {
        self.m
    }

    fn unknowns(&self) -> usize {
        self.m
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        if i.is_multiple_of(2) {
            logistic(x[i]) - 0.73
        } else {
            10.0 * (x[i] - x[i - 1] * x[i - 1])
        }
    }

    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow) {
        row.reset(self.m);
        if i.is_multiple_of(2) {
            let s = logistic(x[i]);
            row.push(i, s * (1.0 - s));
        } else {
            row.push(i - 1, -20.0 * x[i - 1]);
            row.push(i, 10.0);
        }
    }
}

/// Extended Cragg–Levy system with period four.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedCraggLevy {
    m: usize,
}

impl NonlinearSystem for ExtendedCraggLevy {
    fn equations(&self) -> usize {
        self.m
    }

    fn unknowns(&self) -> usize {
        self.m
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        match (i + 1) % 4 {
            1 => {
                let d = exp(x[i]) - x[i + 1];
                d * d
            }
            2 => {
                let d = x[i] - x[i + 1];
                10.0 * d * d * d
            }
            3 => {
                let t = tan(x[i] - x[i + 1]);
                t * t
            }
            _ => x[i] - 1.0,
        }
    }

    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow) {
        row.reset(self.m);
        match (i + 1) % 4 {
            1 => {
                let e = exp(x[i]);
                let d = e - x[i + 1];
                row.push(i, 2.0 * d * e);
                row.push(i + 1, -2.0 * d);
            }
            2 => {
                let d = x[i] - x[i + 1];
                let g = 30.0 * d * d;
                row.push(i, g);
                row.push(i + 1, -g);
            }
            3 => {
                let t = tan(x[i] - x[i + 1]);
                let g = 2.0 * t * (1.0 + t * t);
                row.push(i, g);
                row.push(i + 1, -g);
            }
            _ => row.push(i, 1.0),
        }
    }
}

/// Chandrasekhar H-equation discretized with the composite midpoint rule:
/// `F_i(u) = u_i - (1 - c/(2m) Σ_j t_i u_j / (t_i + t_j))^{-1}`,
/// `t_i = (i - 1/2)/m` in 1-based indexing.
#[derive(Debug, Clone)]
pub struct ChandrasekharH {
    m: usize,
    c: f64,
    nodes: Vec<f64>,
}

impl ChandrasekharH {
    pub fn new(m: usize, c: f64) -> Self {
        let nodes = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        Self { m, c, nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `A_i = 1 - c/(2m) Σ_j t_i u_j / (t_i + t_j)`.
    fn denominator(&self, i: usize, u: &[f64]) -> f64 {
        let ti = self.nodes[i];
        let sum: f64 = self
            .nodes
            .iter()
            .zip(u)
            .map(|(tj, uj)| ti * uj / (ti + tj))
            .sum();
        1.0 - self.c / (2.0 * self.m as f64) * sum
    }
}

impl NonlinearSystem for ChandrasekharH {
    fn equations(&self) -> usize {
        self.m
    }

    fn unknowns(&self) -> usize {
        self.m
    }

    fn component(&self, i: usize, u: &[f64]) -> f64 {
        u[i] - 1.0 / self.denominator(i, u)
    }

    fn gradient_into(&self, i: usize, u: &[f64], row: &mut SparseRow) {
        row.reset(self.m);
        let a = self.denominator(i, u);
        let scale = self.c / (2.0 * self.m as f64) / (a * a);
        let ti = self.nodes[i];
        for (j, tj) in self.nodes.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            row.push(j, delta - scale * ti / (ti + tj));
        }
    }
}

/// Augmented Rosenbrock system with period four.
#[derive(Debug, Clone, Copy)]
pub struct AugmentedRosenbrock {
    m: usize,
}

impl NonlinearSystem for AugmentedRosenbrock {
    fn equations(&self) -> usize {
        self.m
    }

    fn unknowns(&self) -> usize {
        self.m
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        match (i + 1) % 4 {
            1 => 100.0 * (x[i + 1] - x[i] * x[i]),
            2 => 1.0 - 4.0 * x[i - 1],
            3 => 1.25 * x[i] - 0.25 * x[i] * x[i] * x[i],
            _ => x[i],
        }
    }

    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow) {
        row.reset(self.m);
        match (i + 1) % 4 {
            1 => {
                row.push(i, -200.0 * x[i]);
                row.push(i + 1, 100.0);
            }
            2 => row.push(i - 1, -4.0),
            3 => row.push(i, 1.25 - 0.75 * x[i] * x[i]),
            _ => row.push(i, 1.0),
        }
    }
}

/// Extended Powell badly scaled system with period two.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedPowell {
    m: usize,
}

impl NonlinearSystem for ExtendedPowell {
    fn equations(&self) -> usize {
        self.m
    }

    fn unknowns(&self) -> usize {
        self.m
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        if i.is_multiple_of(2) {
            10000.0 * x[i] * x[i + 1] - 1.0
        } else {
            exp(-x[i - 1]) + exp(-x[i]) - 1.0001
        }
    }

    fn gradient_into(&self, i: usize, x: &[f64], row: &mut SparseRow) {
        row.reset(self.m);
        if i.is_multiple_of(2) {
            row.push(i, 10000.0 * x[i + 1]);
            row.push(i + 1, 10000.0 * x[i]);
        } else {
            row.push(i - 1, -exp(-x[i - 1]));
            row.push(i, -exp(-x[i]));
        }
    }
}

/// `F(x) = A x - b` for a dense `A`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    matrix: DenseOperator,
    rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
}

impl NonlinearSystem for LinearSystem {
    fn equations(&self) -> usize {
        self.matrix.rows()
    }

    fn unknowns(&self) -> usize {
        self.matrix.cols()
    }

    fn component(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.matrix.row(i), x) - self.rhs[i]
    }

    fn gradient_into(&self, i: usize, _x: &[f64], row: &mut SparseRow) {
        row.reset(self.matrix.cols());
        for (j, &a) in self.matrix.row(i).iter().enumerate() {
            if a != 0.0 {
                row.push(j, a);
            }
        }
    }
}

/// Wraps `F(x) = A x - b` and returns it with the minimum-norm solution
/// `A^+ b`, computed from the eigendecomposition of `A^T A`.
pub fn make_linear_problem(matrix: DenseOperator, rhs: Vec<f64>) -> Result<(LinearSystem, Vec<f64>)> {
    let (p, n) = (matrix.rows(), matrix.cols());
    if rhs.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: rhs.len(),
        });
    }
    // nalgebra's SVD can return an inaccurate factorization for matrices
    // with several zero singular values; the symmetric eigensolver does not.
    let a = DMatrix::from_row_slice(p, n, matrix.data());
    let atb = a.transpose() * DVector::from_column_slice(&rhs);
    let eig = (a.transpose() * &a).symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = 100.0 * f64::EPSILON * (p.max(n) as f64) * top;
    let mut x = DVector::zeros(n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&atb) / lambda);
        }
    }
    let x_star: Vec<f64> = x.iter().copied().collect();

    let mut ax = vec![0.0; p];
    matrix.apply(&x_star, &mut ax);
    let misfit: Vec<f64> = ax.iter().zip(&rhs).map(|(l, r)| l - r).collect();
    let residual = norm(&misfit);
    if residual > 1e-10 * f64::max(1.0, norm(&rhs)) {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok((LinearSystem { matrix, rhs }, x_star))
}
