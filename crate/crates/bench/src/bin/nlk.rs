use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlk_bench::emit::{write_history, write_summary_csv};
use nlk_bench::suite::reference_solution;
use nlk_bench::{
    attach_speedups, emit, run_case, run_suite, BenchError, Cell, GridConfig, OutputFormat, RunStatus,
};
use nlk_core::{make_problem, Method, ProblemKind, ProblemSpec, StoppingConfig};

#[derive(Parser)]
#[command(name = "nlk", version, about = "Nonlinear Kaczmarz solvers and benchmark grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark problem and print its summary row.
    Solve(SolveArgs),
    /// Run a grid described by a TOML file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: ProblemKind,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    method: Method,
    /// Greedy threshold; the default depends on problem and method.
    #[arg(long)]
    theta: Option<f64>,
    /// Upper bound on accepted momentum (`inf` allowed).
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tau_a: Option<f64>,
    #[arg(long)]
    tau_r: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-iteration history here (JSON if the name ends in .json).
    #[arg(long)]
    history: Option<PathBuf>,
    /// Record error norms against a tight-tolerance reference solution.
    #[arg(long)]
    reference: bool,
    /// H-equation albedo.
    #[arg(long)]
    c: Option<f64>,
    /// Build dense problems beyond the default size cap.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Run cells concurrently (overrides the config file).
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn history_format(path: &Path) -> OutputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

/// Returns whether the run ended cleanly (converged or capped).
fn solve(args: SolveArgs) -> Result<bool, BenchError> {
    let mut spec = ProblemSpec::new(args.problem, args.m);
    spec.allow_large = args.allow_large;
    if let Some(c) = args.c {
        spec.c = c;
    }
    let mut cell = Cell::new(spec, args.method);
    let cfg = &mut cell.method;
    cfg.seed = args.seed;
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.beta_max {
        cfg.beta_max = v;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    let base = StoppingConfig::default();
    cell.stop = StoppingConfig {
        tau_a: args.tau_a.unwrap_or(base.tau_a),
        tau_r: args.tau_r.unwrap_or(base.tau_r),
        max_iterations: args.max_iters.unwrap_or(base.max_iterations),
    };
    cell.method.validate()?;
    cell.stop.validate()?;

    let problem = make_problem(&spec)?;
    let reference = if args.reference {
        reference_solution(&problem, spec.kind, &cell.stop)
    } else {
        None
    };
    if args.reference && reference.is_none() {
        eprintln!("warning: reference solve did not converge; error norms omitted");
    }
    let output = run_case(
        spec.kind.name(),
        &problem.system,
        &problem.x0,
        &cell.method,
        &cell.stop,
        reference.as_deref(),
        args.history.is_some(),
    );

    if let (Some(path), Some(history)) = (&args.history, &output.history) {
        let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
        let mut out = BufWriter::new(file);
        write_history(history, history_format(path), &mut out)?;
        out.flush().map_err(|e| BenchError::io(path, e))?;
    }
    let record = output.record;
    write_summary_csv(std::slice::from_ref(&record), io::stdout().lock())?;
    if let Some(failure) = &output.failure {
        eprintln!("evaluation failure: {failure}");
    }
    Ok(record.status != RunStatus::EvaluationFailure)
}

fn bench(args: BenchArgs) -> Result<bool, BenchError> {
    let config = GridConfig::load(&args.config)?;
    let cells = config.cells()?;
    let mut options = config.suite_options();
    options.parallel |= args.parallel;
    let mut outputs = run_suite(&cells, &options)?;

    let mut records: Vec<_> = outputs.iter().map(|o| o.record.clone()).collect();
    if let Err(err) = attach_speedups(&mut records, Method::Abnkam) {
        eprintln!("warning: {err}; affected speed-ups left empty");
    }
    for (output, record) in outputs.iter_mut().zip(records) {
        output.record = record;
    }
    for written in emit(&outputs, args.format, &args.out)? {
        println!("{}", written.display());
    }
    let mut clean = true;
    for output in &outputs {
        if let Some(failure) = &output.failure {
            clean = false;
            let r = &output.record;
            eprintln!("{} on {} (m = {}): {failure}", r.method, r.problem, r.m);
        }
    }
    Ok(clean)
}
