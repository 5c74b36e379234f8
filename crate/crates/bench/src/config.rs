//! Flat TOML grid description.
//!
//! ```toml
//! problems = ["modified_rosenbrock", "extended_cragg_levy"]
//! sizes = [1000]
//! methods = ["abnkam", "abnk2", "mrbnk", "rbcnk"]
//! seeds = [0]            # optional, default [0]
//! theta = 0.5            # optional, default depends on problem and method
//! beta_max = inf         # optional
//! epsilon = 1e-16        # optional
//! alpha = 1.0            # optional
//! beta = 0.3             # optional
//! tau_a = 1e-6           # optional
//! tau_r = 1e-8           # optional
//! max_iterations = 20000 # optional
//! c = 0.9                # optional, H-equation only
//! allow_large = false    # optional
//! history = false        # optional
//! reference = false      # optional
//! parallel = false       # optional
//! ```
//!
//! Cells are the cartesian product problems × sizes × methods × seeds.

use std::fs;
use std::path::Path;

use nlk_core::{Method, ProblemKind, ProblemSpec, StoppingConfig};
use serde::Deserialize;

use crate::error::{BenchError, Result};
use crate::suite::{Cell, SuiteOptions};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub problems: Vec<String>,
    pub sizes: Vec<usize>,
    pub methods: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub theta: Option<f64>,
    pub beta_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tau_a: Option<f64>,
    pub tau_r: Option<f64>,
    pub max_iterations: Option<usize>,
    pub c: Option<f64>,
    #[serde(default)]
    pub allow_large: bool,
    #[serde(default)]
    pub history: bool,
    #[serde(default)]
    pub reference: bool,
    #[serde(default)]
    pub parallel: bool,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn stopping(&self) -> StoppingConfig {
        let base = StoppingConfig::default();
        StoppingConfig {
            tau_a: self.tau_a.unwrap_or(base.tau_a),
            tau_r: self.tau_r.unwrap_or(base.tau_r),
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
        }
    }

    /// Expands the grid in the order problems, sizes, methods, seeds.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let problems = parse_all::<ProblemKind>(&self.problems, "problem")?;
        let methods = parse_all::<Method>(&self.methods, "method")?;
        let stop = self.stopping();
        let mut cells = Vec::new();
        for &kind in &problems {
            for &m in &self.sizes {
                let mut spec = ProblemSpec::new(kind, m);
                spec.allow_large = self.allow_large;
                if let Some(c) = self.c {
                    spec.c = c;
                }
                for &method in &methods {
                    for &seed in &self.seeds {
                        let mut cell = Cell::new(spec, method).with_stop(stop);
                        let cfg = &mut cell.method;
                        cfg.seed = seed;
                        if let Some(theta) = self.theta {
                            cfg.theta = theta;
                        }
                        if let Some(v) = self.beta_max {
                            cfg.beta_max = v;
                        }
                        if let Some(v) = self.epsilon {
                            cfg.epsilon = v;
                        }
                        if let Some(v) = self.alpha {
                            cfg.alpha = v;
                        }
                        if let Some(v) = self.beta {
                            cfg.beta = v;
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(BenchError::EmptyGrid);
        }
        Ok(cells)
    }

    pub fn suite_options(&self) -> SuiteOptions {
        SuiteOptions {
            record_history: self.history,
            reference: self.reference,
            parallel: self.parallel,
        }
    }
}

fn parse_all<T: std::str::FromStr>(names: &[String], what: &str) -> Result<Vec<T>> {
    names
        .iter()
        .map(|name| {
            name.parse()
                .map_err(|_| BenchError::Config(format!("unknown {what} {name:?}")))
        })
        .collect()
}
