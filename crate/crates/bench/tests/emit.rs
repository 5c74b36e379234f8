use nlk_bench::emit::{history_file_name, read_summary_csv, write_history, write_summary_json, HISTORY_HEADER};
use nlk_bench::{attach_speedups, emit, write_summary_csv, OutputFormat, RunOutput, RunRecord, RunStatus};
use nlk_core::{Branch, IterationRecord, Method, StepRecord};
use proptest::prelude::*;

fn record(method: Method, m: usize, status: RunStatus, cpu: f64) -> RunRecord {
    RunRecord {
        method,
        problem: "extended_cragg_levy".into(),
        m,
        theta: 0.5,
        seed: 0,
        status,
        iterations: 169,
        cpu_seconds: cpu,
        final_residual: 8.5e-7,
        speedup: None,
    }
}

fn csv_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_summary_csv(records, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn one_record_is_two_lines() {
    let text = csv_string(&[record(Method::Abnkam, 1000, RunStatus::Converged, 0.1)]);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "method,problem,m,theta,seed,status,iterations,cpu_seconds,final_residual,speedup");
    assert!(lines[1].starts_with("abnkam,extended_cragg_levy,1000,"));
}

#[test]
fn capped_record_has_empty_speedup() {
    let mut rows = vec![
        record(Method::Abnkam, 1000, RunStatus::Converged, 0.1),
        record(Method::Nurk, 1000, RunStatus::MaxIterations, 9.0),
    ];
    attach_speedups(&mut rows, Method::Abnkam).unwrap();
    let text = csv_string(&rows);
    let capped = text.lines().find(|l| l.starts_with("nurk")).unwrap();
    assert!(capped.contains(",max_iterations,"));
    assert!(capped.ends_with(','));
}

#[test]
fn rows_are_sorted_by_problem_size_method() {
    let mut a = record(Method::Mrbnk, 2000, RunStatus::Converged, 1.0);
    a.problem = "modified_rosenbrock".into();
    let rows = vec![
        a,
        record(Method::Mrbnk, 1000, RunStatus::Converged, 1.0),
        record(Method::Abnkam, 2000, RunStatus::Converged, 1.0),
        record(Method::Abnkam, 1000, RunStatus::Converged, 1.0),
    ];
    let parsed = read_summary_csv(csv_string(&rows).as_bytes()).unwrap();
    let keys: Vec<_> = parsed.iter().map(|r| (r.problem.as_str(), r.m, r.method)).collect();
    assert_eq!(
        keys,
        [
            ("extended_cragg_levy", 1000, Method::Abnkam),
            ("extended_cragg_levy", 1000, Method::Mrbnk),
            ("extended_cragg_levy", 2000, Method::Abnkam),
            ("modified_rosenbrock", 2000, Method::Mrbnk),
        ]
    );
}

#[test]
fn emitted_speedup_matches_cpu_columns() {
    let mut rows = Vec::new();
    for (i, method) in Method::ALL.into_iter().enumerate() {
        rows.push(record(method, 1000, RunStatus::Converged, 0.0162 * (i as f64 + 1.0).powf(2.7)));
    }
    attach_speedups(&mut rows, Method::Abnkam).unwrap();
    let parsed = read_summary_csv(csv_string(&rows).as_bytes()).unwrap();
    let base = parsed.iter().find(|r| r.method == Method::Abnkam).unwrap().cpu_seconds;
    for r in &parsed {
        let su = r.speedup.unwrap();
        let recomputed = r.cpu_seconds / base;
        assert!((su - recomputed).abs() <= 1e-12 * recomputed);
    }
}

#[test]
fn rejects_malformed_rows() {
    let text = "method,problem,m,theta,seed,status,iterations,cpu_seconds,final_residual,speedup\n\
                abnkam,p,ten,0.5,0,converged,1,0.1,0.1,\n";
    assert!(read_summary_csv(text.as_bytes()).is_err());
    assert!(read_summary_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn json_summary_uses_names_and_nulls() {
    let mut buf = Vec::new();
    write_summary_json(&[record(Method::Rbcnk, 1000, RunStatus::MaxIterations, 1.0)], &mut buf).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(value[0]["method"], "rbcnk");
    assert_eq!(value[0]["status"], "max_iterations");
    assert!(value[0]["speedup"].is_null());
}

fn history() -> Vec<IterationRecord> {
    vec![
        IterationRecord {
            k: 0,
            residual_norm: 10.0,
            error_norm: Some(1.0),
            step: None,
        },
        IterationRecord {
            k: 1,
            residual_norm: 1.0,
            error_norm: Some(0.1),
            step: Some(StepRecord {
                branch: Branch::Momentum,
                alpha: Some(0.7),
                beta: Some(0.2),
                delta: Some(3.0),
                sin2_angle: Some(0.5),
                block_size: 12,
                lsqr_capped: false,
            }),
        },
    ]
}

#[test]
fn history_csv_layout() {
    let mut buf = Vec::new();
    write_history(&history(), OutputFormat::Csv, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], HISTORY_HEADER.join(","));
    assert_eq!(lines[1], "0,1.0000000000000000e1,1.0000000000000000e0,,,,,");
    assert!(lines[2].ends_with(",12,momentum"));
}

#[test]
fn emit_writes_summary_and_histories() {
    let dir = tempfile::tempdir().unwrap();
    let with_history = RunOutput {
        record: record(Method::Abnkam, 1000, RunStatus::Converged, 0.1),
        history: Some(history()),
        failure: None,
    };
    let without = RunOutput {
        record: record(Method::Abnk2, 1000, RunStatus::Converged, 0.2),
        history: None,
        failure: None,
    };
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let out = dir.path().join(format.extension());
        let written = emit(&[with_history.clone(), without.clone()], format, &out).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(written[0], out.join(format!("summary.{format}")));
        assert_eq!(written[1], out.join(history_file_name(&with_history.record, format)));
        assert!(written.iter().all(|p| p.is_file()));
    }
    let parsed = read_summary_csv(std::fs::File::open(dir.path().join("csv/summary.csv")).unwrap()).unwrap();
    assert_eq!(parsed.len(), 2);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        (-300i32..300).prop_map(|e| 10f64.powi(e)),
        Just(0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn any_record() -> impl Strategy<Value = RunRecord> {
    (
        prop::sample::select(Method::ALL.to_vec()),
        "[a-z_]{1,12}",
        1usize..1_000_000,
        finite(),
        any::<u64>(),
        prop::sample::select(vec![RunStatus::Converged, RunStatus::MaxIterations, RunStatus::EvaluationFailure]),
        0usize..100_000,
        finite(),
        prop_oneof![finite(), Just(f64::NAN), Just(f64::INFINITY)],
        prop::option::of(finite()),
    )
        .prop_map(|(method, problem, m, theta, seed, status, iterations, cpu, fr, speedup)| RunRecord {
            method,
            problem,
            m,
            theta,
            seed,
            status,
            iterations,
            cpu_seconds: cpu,
            final_residual: fr,
            speedup,
        })
}

fn bits(r: &RunRecord) -> (Method, String, usize, u64, u64, RunStatus, usize, u64, u64, Option<u64>) {
    (
        r.method,
        r.problem.clone(),
        r.m,
        r.theta.to_bits(),
        r.seed,
        r.status,
        r.iterations,
        r.cpu_seconds.to_bits(),
        r.final_residual.to_bits(),
        r.speedup.map(f64::to_bits),
    )
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(records in prop::collection::vec(any_record(), 1..8)) {
        let parsed = read_summary_csv(csv_string(&records).as_bytes()).unwrap();
        let expected: Vec<_> = nlk_bench::emit::sorted(&records).iter().map(bits).collect();
        let got: Vec<_> = parsed.iter().map(bits).collect();
        prop_assert_eq!(got, expected);
    }
}
