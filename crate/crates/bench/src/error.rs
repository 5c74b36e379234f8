use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("I/O failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid grid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] nlk_core::Error),

    #[error("no converged {baseline} run for {problem} with m = {m} and seed {seed}")]
    MissingBaseline {
        baseline: String,
        problem: String,
        m: usize,
        seed: u64,
    },

    #[error("the grid has no cells")]
    EmptyGrid,

    #[error("malformed summary row {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
