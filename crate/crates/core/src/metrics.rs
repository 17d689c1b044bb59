//! Per-task collapse metrics, per-set result rows and bucketed summaries.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::federated::{allocate_cores, Approach, Reason};
use crate::taskgraph::Task;
use crate::wceto::Cycles;

/// Change caused by collapsing one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskMetrics {
    /// Dedicated cores saved; zero unless both versions have an allocation.
    pub m_saved: i64,
    #[serde(rename = "delta_C")]
    pub delta_c: Cycles,
    #[serde(rename = "delta_L")]
    pub delta_l: Cycles,
}

pub fn task_metrics(pre: &Task, post: &Task) -> TaskMetrics {
    let m_saved = match (allocate_cores(pre), allocate_cores(post)) {
        (Some(a), Some(b)) => i64::from(a) - i64::from(b),
        _ => 0,
    };
    TaskMetrics {
        m_saved,
        delta_c: pre.workload() - post.workload(),
        delta_l: post.critical_path_length() - pre.critical_path_length(),
    }
}

/// One row of the results table, plus the baseline figures needed to
/// express savings as fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetRecord {
    pub set_id: usize,
    pub cores: u32,
    pub target_u: f64,
    pub approach: Approach,
    pub schedulable: bool,
    pub reason: Reason,
    pub m_high: u32,
    /// Σ m_saved over high-utilization tasks allocatable both before and after.
    pub delta_m: i64,
    pub delta_c: Cycles,
    pub delta_l: Cycles,
    pub elapsed_ms: Option<f64>,
    /// Baseline cores of the tasks counted in `delta_m`.
    pub base_m_compared: u32,
    /// Baseline workload of all tasks in the set.
    pub base_c: Cycles,
    /// Baseline workload of the high-utilization tasks.
    pub base_c_high: Cycles,
    /// Workload saved on the high-utilization tasks.
    pub delta_c_high: Cycles,
}

pub const RESULTS_HEADER: [&str; 11] = [
    "set_id", "cores", "target_U", "approach", "schedulable", "reason", "m_high", "delta_m", "delta_C", "delta_L",
    "elapsed_ms",
];

pub fn write_results_csv<W: Write>(records: &[SetRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record([
            r.set_id.to_string(),
            r.cores.to_string(),
            r.target_u.to_string(),
            r.approach.to_string(),
            r.schedulable.to_string(),
            r.reason.as_str().to_string(),
            r.m_high.to_string(),
            r.delta_m.to_string(),
            fmt_num(r.delta_c),
            fmt_num(r.delta_l),
            r.elapsed_ms.map(|e| format!("{e:.3}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed precision keeps tables stable against summation-order noise.
fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Aggregate over one utilization bucket and approach.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub bucket_lo: f64,
    pub bucket_hi: f64,
    pub approach: Approach,
    pub n: usize,
    pub schedulable: usize,
    pub sched_ratio: f64,
    pub mean_cores: f64,
    pub mean_delta_m: f64,
    pub mean_delta_c: f64,
    pub mean_delta_l: f64,
    /// Σ delta_m / Σ baseline cores of the same tasks; `None` without high tasks.
    pub core_savings: Option<f64>,
    /// Σ delta_C / Σ baseline workload over all tasks.
    pub workload_reduction: Option<f64>,
    /// The same restricted to high-utilization tasks.
    pub workload_reduction_high: Option<f64>,
}

/// Groups records by `⌊target_U / width⌋` and approach.
///
/// Records are folded in (set_id, approach) order, so the input order never
/// changes the floating-point sums.
pub fn aggregate(records: &[SetRecord], width: f64) -> Vec<PointSummary> {
    let mut sorted: Vec<&SetRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.set_id, r.approach));
    #[derive(Default)]
    struct Acc {
        n: usize,
        ok: usize,
        cores: f64,
        dm: f64,
        dc: f64,
        dl: f64,
        base_m: f64,
        base_c: f64,
        base_c_high: f64,
        dc_high: f64,
    }
    let mut groups: BTreeMap<(u64, Approach), Acc> = BTreeMap::new();
    for r in sorted {
        let b = if width.is_finite() { (r.target_u / width).floor() as u64 } else { 0 };
        let a = groups.entry((b, r.approach)).or_default();
        a.n += 1;
        a.ok += usize::from(r.schedulable);
        a.cores += f64::from(r.m_high);
        a.dm += r.delta_m as f64;
        a.dc += r.delta_c;
        a.dl += r.delta_l;
        a.base_m += f64::from(r.base_m_compared);
        a.base_c += r.base_c;
        a.base_c_high += r.base_c_high;
        a.dc_high += r.delta_c_high;
    }
    let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
    groups
        .into_iter()
        .map(|((b, approach), a)| {
            let n = a.n as f64;
            let (lo, hi) = if width.is_finite() { (b as f64 * width, (b + 1) as f64 * width) } else { (0.0, f64::INFINITY) };
            PointSummary {
                bucket_lo: lo,
                bucket_hi: hi,
                approach,
                n: a.n,
                schedulable: a.ok,
                sched_ratio: a.ok as f64 / n,
                mean_cores: a.cores / n,
                mean_delta_m: a.dm / n,
                mean_delta_c: a.dc / n,
                mean_delta_l: a.dl / n,
                core_savings: ratio(a.dm, a.base_m),
                workload_reduction: ratio(a.dc, a.base_c),
                workload_reduction_high: ratio(a.dc_high, a.base_c_high),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[PointSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "bucket_lo",
        "bucket_hi",
        "approach",
        "n",
        "schedulable",
        "sched_ratio",
        "mean_cores",
        "mean_delta_m",
        "mean_delta_C",
        "mean_delta_L",
        "core_savings",
        "workload_reduction",
        "workload_reduction_high",
    ])?;
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.bucket_lo.to_string(),
            r.bucket_hi.to_string(),
            r.approach.to_string(),
            r.n.to_string(),
            r.schedulable.to_string(),
            fmt_num(r.sched_ratio),
            fmt_num(r.mean_cores),
            fmt_num(r.mean_delta_m),
            fmt_num(r.mean_delta_c),
            fmt_num(r.mean_delta_l),
            opt(r.core_savings),
            opt(r.workload_reduction),
            opt(r.workload_reduction_high),
        ])?;
    }
    w.flush()?;
    Ok(())
}
