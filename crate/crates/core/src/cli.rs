//! `dagot` command line.
//!
//! Exit codes: 0 success, 1 runtime or I/O error, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::collapse::{dagot_reduce, CollapseOrder, Shape};
use crate::evaluation::{evaluate, EvalOptions};
use crate::federated::{allocate_cores, allocate_cores_for, Approach};
use crate::generator::{generate, GenConfig};
use crate::io::{read_json, read_task, IoError, TaskFile};
use crate::metrics::{aggregate, task_metrics, write_results_csv, write_summary_csv, SetRecord, TaskMetrics};
use crate::rng::{sub_seed, Stage};
use crate::simulator::{simulate_with, summarize, write_trace_csv, SimOptions, TieBreak};
use crate::store;
use crate::taskgraph::NodeId;

#[derive(Debug, Parser)]
#[command(name = "dagot", version, about = "Cache-aware DAG task collapse and federated schedulability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TieArg {
    Longest,
    Random,
}

impl FromStr for TieArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "longest" => Ok(TieArg::Longest),
            "random" => Ok(TieArg::Random),
            other => Err(format!("unknown tie-break {other:?}, expected longest or random")),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate task pools and task sets.
    Generate {
        /// Generator configuration JSON; defaults to the full parameter grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configuration seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "DAGOT_JOBS")]
        jobs: Option<usize>,
    },
    /// Collapse one task and print the result as JSON.
    Collapse {
        task: PathBuf,
        #[arg(long, default_value = "penalty")]
        order: CollapseOrder,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Analyze generated task sets and write the results table.
    Analyze {
        /// Directory written by `generate`.
        sets: PathBuf,
        /// Approaches to evaluate; all when omitted.
        #[arg(long)]
        approach: Vec<Approach>,
        /// Replaces the core count of every set.
        #[arg(long)]
        cores: Option<u32>,
        /// Per-set budget in seconds for the collapse-based approaches.
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        #[arg(long, env = "DAGOT_JOBS")]
        jobs: Option<usize>,
        /// Record per-row wall-clock time.
        #[arg(long)]
        timing: bool,
        /// Results CSV path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bucketed summary CSV path.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = 4.0)]
        bucket: f64,
    },
    /// Simulate one task on dedicated cores.
    Simulate {
        task: PathBuf,
        /// Core count; the task's dedicated allocation when omitted.
        #[arg(long)]
        cores: Option<usize>,
        #[arg(long, default_value = "longest")]
        tiebreak: TieArg,
        #[arg(long, default_value_t = 1)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace CSV of the first run.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Scale every node by a random factor in [EARLY, 1].
        #[arg(long)]
        early: Option<f64>,
    },
    /// Generate, analyze and summarize in one run.
    Evaluate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Two graph iterations and 50 sets per point instead of the full grid.
        #[arg(long)]
        desk: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
        #[arg(long, env = "DAGOT_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_content_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn main() -> ExitCode {
    match run(std::env::args_os(), &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Runtime(m)) = &e;
            eprintln!("dagot: {m}");
            ExitCode::from(e.code())
        }
    }
}

/// Parses `args` and runs the command, writing primary output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}").map_err(runtime)?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Generate { config, out, seed, jobs } => {
            let cfg = load_config(config.as_deref(), false, seed)?;
            with_jobs(jobs, || cmd_generate(&cfg, &out))
        }
        Command::Collapse { task, order, seed } => cmd_collapse(&task, order, seed, stdout),
        Command::Analyze { sets, approach, cores, timeout, jobs, timing, out, summary, bucket } => {
            let opts = EvalOptions {
                approaches: if approach.is_empty() { Approach::ALL.to_vec() } else { approach },
                timeout: Some(parse_timeout(timeout)?),
                timing,
                cores,
            };
            cmd_analyze(&sets, &opts, jobs, out.as_deref(), summary.as_deref(), bucket, stdout)
        }
        Command::Simulate { task, cores, tiebreak, runs, seed, trace, early } => {
            cmd_simulate(&task, cores, tiebreak, runs, seed, trace.as_deref(), early, stdout)
        }
        Command::Evaluate { config, desk, seed, out, timeout, jobs, timing } => {
            let cfg = load_config(config.as_deref(), desk, seed)?;
            let opts = EvalOptions { timeout: Some(parse_timeout(timeout)?), timing, ..EvalOptions::default() };
            with_jobs(jobs, || cmd_evaluate(&cfg, &out, &opts))
        }
    }
}

fn parse_timeout(secs: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(secs).map_err(|e| CliError::Usage(format!("--timeout: {e}")))
}

fn with_jobs<R>(jobs: Option<usize>, f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError>
where
    R: Send,
{
    match jobs {
        None | Some(0) => f(),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(runtime)?.install(f),
    }
}

fn load_config(path: Option<&Path>, desk: bool, seed: Option<u64>) -> Result<GenConfig, CliError> {
    let mut cfg = match path {
        Some(p) => read_json::<GenConfig>(p).map_err(|e| CliError::Usage(e.to_string()))?,
        None if desk => GenConfig::desk(),
        None => GenConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    Ok(cfg)
}

fn cmd_generate(cfg: &GenConfig, out: &Path) -> Result<(), CliError> {
    let generated = generate(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let c = generated.counts;
    eprintln!(
        "generate: {} graphs, {} executed, {} timed, {} kept, {} removed, {} sets",
        c.graphs, c.executed, c.timed, c.kept, c.removed, c.sets
    );
    store::save(out, &generated)?;
    Ok(())
}

#[derive(Serialize)]
struct CollapseReport {
    order: CollapseOrder,
    seed: u64,
    before: ShapeReport,
    after: ShapeReport,
    accepted: Vec<(NodeId, NodeId)>,
    merges: std::collections::BTreeMap<NodeId, Vec<NodeId>>,
    metrics: TaskMetrics,
    task: TaskFile,
}

#[derive(Serialize)]
struct ShapeReport {
    workload: f64,
    critical_path: f64,
    real_cores: f64,
    cores: Option<u32>,
}

impl ShapeReport {
    fn new(s: Shape, d: f64) -> Self {
        ShapeReport {
            workload: s.workload,
            critical_path: s.critical_path,
            real_cores: s.cores,
            cores: allocate_cores_for(s.workload, s.critical_path, d),
        }
    }
}

fn cmd_collapse(path: &Path, order: CollapseOrder, seed: u64, stdout: &mut dyn Write) -> Result<(), CliError> {
    let task = read_task(path)?;
    let r = dagot_reduce(&task.graph, task.deadline, order, seed);
    let post = task.with_graph(r.graph.clone());
    let report = CollapseReport {
        order,
        seed,
        before: ShapeReport::new(r.before, task.deadline),
        after: ShapeReport::new(r.after, task.deadline),
        accepted: r.accepted.clone(),
        merges: r.merges.history(),
        metrics: task_metrics(&task, &post),
        task: TaskFile::from_task(&post),
    };
    let text = serde_json::to_string_pretty(&report).map_err(runtime)?;
    writeln!(stdout, "{text}").map_err(runtime)
}

fn write_records(records: &[SetRecord], out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let f = create(p)?;
            write_results_csv(records, BufWriter::new(f)).map_err(runtime)
        }
        None => write_results_csv(records, stdout).map_err(runtime),
    }
}

fn create(p: &Path) -> Result<File, CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    dir: &Path,
    opts: &EvalOptions,
    jobs: Option<usize>,
    out: Option<&Path>,
    summary: Option<&Path>,
    bucket: f64,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    // A missing or unreadable workload directory is an I/O failure here.
    let (_, pool, sets) = store::load(dir).map_err(runtime)?;
    eprintln!("analyze: {} sets, {} approaches", sets.len(), opts.approaches.len());
    let records = with_jobs(jobs, || Ok(evaluate(&pool, &sets, opts)))?;
    write_records(&records, out, stdout)?;
    if let Some(p) = summary {
        write_summary_csv(&aggregate(&records, bucket), BufWriter::new(create(p)?)).map_err(runtime)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    cores: Option<usize>,
    tiebreak: TieArg,
    runs: u32,
    seed: u64,
    trace: Option<&Path>,
    early: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let task = read_task(path)?;
    if let Some(f) = early {
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::Usage(format!("--early must lie in [0, 1], got {f}")));
        }
    }
    let m = match cores {
        Some(0) => return Err(CliError::Usage("--cores must be at least 1".into())),
        Some(m) => m,
        None => allocate_cores(&task).unwrap_or(1) as usize,
    };
    let mut violations = 0;
    for run in 0..runs.max(1) {
        let run_seed = sub_seed(seed, Stage::Simulation, u64::from(run));
        let tie_break = match tiebreak {
            TieArg::Longest => TieBreak::LongestPath,
            TieArg::Random => TieBreak::Random(run_seed),
        };
        let opts = SimOptions { tie_break, early_completion: early.map(|f| (f, run_seed)) };
        let t = simulate_with(&task.graph, m, opts);
        if run == 0 {
            if let Some(p) = trace {
                write_trace_csv(&t, BufWriter::new(create(p)?)).map_err(runtime)?;
            }
        }
        let s = summarize(&t, &task.graph, m, task.deadline);
        violations += usize::from(!s.deadline_met);
        writeln!(stdout, "{}", serde_json::to_string(&s).map_err(runtime)?).map_err(runtime)?;
    }
    if violations > 0 {
        eprintln!("simulate: {violations} run(s) missed the deadline {}", task.deadline);
    }
    Ok(())
}

fn cmd_evaluate(cfg: &GenConfig, out: &Path, opts: &EvalOptions) -> Result<(), CliError> {
    let generated = generate(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let c = generated.counts;
    eprintln!("evaluate: {} kept of {} timed tasks, {} sets", c.kept, c.timed, c.sets);
    store::save(out, &generated)?;
    let records = evaluate(&generated.pool, &generated.sets, opts);
    write_records(&records, Some(&out.join("results.csv")), &mut io::sink())?;
    let summary = aggregate(&records, 4.0);
    write_summary_csv(&summary, BufWriter::new(create(&out.join("summary.csv"))?)).map_err(runtime)?;
    eprintln!("evaluate: wrote {} rows", records.len());
    Ok(())
}
