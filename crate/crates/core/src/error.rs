use thiserror::Error;

/// Errors raised by system evaluation, selection and the update rules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered{}", fmt_row(.row))]
    NonFiniteValue { row: Option<usize> },

    #[error("row index {index} out of range for {len} equations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("residual is identically zero")]
    ZeroResidual,

    #[error("gradient of row {row} vanishes while its residual does not")]
    ZeroGradientRow { row: usize },

    #[error("block direction (F'_J)^T F_J vanishes")]
    ZeroDirection,

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("{problem} requires m to be a positive multiple of {period}, got {m}")]
    InvalidDimension {
        problem: &'static str,
        m: usize,
        period: usize,
    },

    #[error("dense problem size {m} exceeds the cap of {cap} (enable the large-size override)")]
    ProblemTooLarge { m: usize, cap: usize },

    #[error("linear system is inconsistent (residual {residual:e} at the least-squares solution)")]
    InconsistentSystem { residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

fn fmt_row(row: &Option<usize>) -> alloc::string::String {
    match row {
        Some(r) => alloc::format!(" in row {r}"),
        None => alloc::string::String::new(),
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
