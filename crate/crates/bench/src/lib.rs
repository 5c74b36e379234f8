//! Benchmark harness for the `nlk-core` solvers: grid execution with wall
//! clock timing, speed-up ratios, CSV/JSON emission and TOML grid files.

pub mod clock;
pub mod config;
pub mod emit;
pub mod error;
pub mod speedup;
pub mod suite;

pub use clock::StdClock;
pub use config::GridConfig;
pub use emit::{emit, read_summary_csv, write_history, write_summary, write_summary_csv, OutputFormat};
pub use error::{BenchError, Result};
pub use speedup::{attach_speedups, speedup_ratio};
pub use suite::{default_theta, run_case, run_suite, Cell, RunOutput, RunRecord, RunStatus, SuiteOptions};
