use std::collections::HashMap;

use nlk_core::Method;

use crate::error::{BenchError, Result};
use crate::suite::{RunRecord, RunStatus};

/// CPU time of a method relative to the baseline on the same cell.
pub fn speedup_ratio(other_cpu_seconds: f64, baseline_cpu_seconds: f64) -> f64 {
    other_cpu_seconds / baseline_cpu_seconds
}

/// Fills `speedup` on every converged record whose (problem, m, seed) group
/// has a converged `baseline` run. Unconverged records get `None`.
///
/// Groups without a usable baseline are left empty and reported as
/// [`BenchError::MissingBaseline`] (the first one found) after all other
/// groups have been filled.
pub fn attach_speedups(records: &mut [RunRecord], baseline: Method) -> Result<()> {
    let mut baselines: HashMap<(String, usize, u64), f64> = HashMap::new();
    for r in records.iter() {
        if r.method == baseline && r.status == RunStatus::Converged {
            baselines.entry((r.problem.clone(), r.m, r.seed)).or_insert(r.cpu_seconds);
        }
    }
    let mut missing = None;
    for r in records.iter_mut() {
        r.speedup = None;
        if r.status != RunStatus::Converged {
            continue;
        }
        match baselines.get(&(r.problem.clone(), r.m, r.seed)) {
            Some(&base) if base > 0.0 => r.speedup = Some(speedup_ratio(r.cpu_seconds, base)),
            Some(_) => {}
            None => {
                missing.get_or_insert_with(|| BenchError::MissingBaseline {
                    baseline: baseline.name().to_string(),
                    problem: r.problem.clone(),
                    m: r.m,
                    seed: r.seed,
                });
            }
        }
    }
    match missing {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: Method, status: RunStatus, cpu: f64) -> RunRecord {
        RunRecord {
            method,
            problem: "modified_rosenbrock".into(),
            m: 1000,
            theta: 0.5,
            seed: 0,
            status,
            iterations: 10,
            cpu_seconds: cpu,
            final_residual: 1e-7,
            speedup: None,
        }
    }

    #[test]
    fn ratio_of_printed_timings() {
        let su = speedup_ratio(7.4616, 0.0162);
        assert!((su - 460.6).abs() < 0.05);
        assert_eq!(format!("{su:.1}"), "460.6");
    }

    #[test]
    fn attaches_to_converged_rows_only() {
        let mut rows = vec![
            record(Method::Abnkam, RunStatus::Converged, 0.5),
            record(Method::Abnk2, RunStatus::Converged, 2.0),
            record(Method::Ngrkm, RunStatus::MaxIterations, 9.0),
        ];
        attach_speedups(&mut rows, Method::Abnkam).unwrap();
        assert_eq!(rows[0].speedup, Some(1.0));
        assert_eq!(rows[1].speedup, Some(4.0));
        assert_eq!(rows[2].speedup, None);
    }

    #[test]
    fn unconverged_baseline_is_missing() {
        let mut rows = vec![
            record(Method::Abnkam, RunStatus::MaxIterations, 0.5),
            record(Method::Mrbnk, RunStatus::Converged, 2.0),
        ];
        let err = attach_speedups(&mut rows, Method::Abnkam).unwrap_err();
        assert!(matches!(err, BenchError::MissingBaseline { m: 1000, .. }));
        assert_eq!(rows[1].speedup, None);
    }

    #[test]
    fn other_groups_still_filled() {
        let mut other = record(Method::Mrbnk, RunStatus::Converged, 1.0);
        other.m = 2000;
        let mut rows = vec![
            record(Method::Abnkam, RunStatus::Converged, 0.5),
            record(Method::Mrbnk, RunStatus::Converged, 1.0),
            other,
        ];
        assert!(attach_speedups(&mut rows, Method::Abnkam).is_err());
        assert_eq!(rows[1].speedup, Some(2.0));
        assert_eq!(rows[2].speedup, None);
    }
}
