//! Federated scheduling of DAG-OT task sets.
//!
//! Tasks with utilization above one get dedicated cores; the rest are
//! serialized and partitioned onto the remaining cores with Worst-Fit under
//! a per-core EDF test.

pub mod edf;
mod partition;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::collapse::{dagot_reduce_until, CollapseOrder, Shape};
use crate::rng::{sub_seed, Stage};
use crate::taskgraph::{utilization, NodeId, Task};
use crate::wceto::Cycles;

pub use edf::{edf_np_test, edf_p_test, simulate_np_edf, IntTask};
pub use partition::{worst_fit_partition, SeqLoad};

/// Default per-set analysis budget.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
    pub cores: u32,
}

impl TaskSet {
    pub fn utilization(&self) -> f64 {
        self.tasks.iter().map(utilization).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    High,
    Low,
}

pub fn class_of(task: &Task) -> Class {
    if utilization(task) > 1.0 {
        Class::High
    } else {
        Class::Low
    }
}

/// Splits task indices into high (`u > 1`) and low utilization.
pub fn classify(set: &TaskSet) -> (Vec<usize>, Vec<usize>) {
    (0..set.tasks.len()).partition(|&i| class_of(&set.tasks[i]) == Class::High)
}

/// `⌈(C − L)/(D − L)⌉`, at least one; `None` when no core count suffices.
pub fn allocate_cores_for(c: Cycles, l: Cycles, d: Cycles) -> Option<u32> {
    if l > d || (l == d && c > l) {
        return None;
    }
    if l == d {
        return Some(1);
    }
    Some(((c - l) / (d - l)).ceil().max(1.0) as u32)
}

pub fn allocate_cores(task: &Task) -> Option<u32> {
    allocate_cores_for(task.workload(), task.critical_path_length(), task.deadline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "B-NP")]
    BaselineNp,
    #[serde(rename = "B-P")]
    BaselineP,
    #[serde(rename = "OT-A")]
    Arbitrary,
    #[serde(rename = "OT-G")]
    Greatest,
    #[serde(rename = "OT-L")]
    Least,
}

impl Approach {
    pub const ALL: [Approach; 5] =
        [Approach::BaselineNp, Approach::BaselineP, Approach::Arbitrary, Approach::Greatest, Approach::Least];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::BaselineNp => "B-NP",
            Approach::BaselineP => "B-P",
            Approach::Arbitrary => "OT-A",
            Approach::Greatest => "OT-G",
            Approach::Least => "OT-L",
        }
    }

    /// Collapse ordering for DAG-OT approaches; `None` for the baselines.
    pub fn ordering(self) -> Option<CollapseOrder> {
        match self {
            Approach::BaselineNp | Approach::BaselineP => None,
            Approach::Arbitrary => Some(CollapseOrder::Arbitrary),
            Approach::Greatest => Some(CollapseOrder::Benefit),
            Approach::Least => Some(CollapseOrder::Penalty),
        }
    }

    pub fn preemptive(self) -> bool {
        self == Approach::BaselineP
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown approach {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Ok,
    CriticalPathExceedsDeadline,
    InsufficientCores,
    PartitionFailure,
    Timeout,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::CriticalPathExceedsDeadline => "critical_path_exceeds_deadline",
            Reason::InsufficientCores => "insufficient_cores",
            Reason::PartitionFailure => "partition_failure",
            Reason::Timeout => "timeout",
        }
    }
}

/// One task after the approach's collapse step, ready for allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTask {
    pub id: usize,
    /// Class of the uncollapsed task.
    pub class: Class,
    pub shape: Shape,
    pub period: Cycles,
    pub deadline: Cycles,
    pub collapsed_pairs: usize,
    pub merges: Option<BTreeMap<NodeId, Vec<NodeId>>>,
}

impl PreparedTask {
    /// Prepares `task` as it stands, classified by `class`.
    pub fn new(id: usize, class: Class, task: &Task) -> Self {
        PreparedTask {
            id,
            class,
            shape: Shape::of(&task.graph, task.deadline),
            period: task.period,
            deadline: task.deadline,
            collapsed_pairs: 0,
            merges: None,
        }
    }

    pub fn cores(&self) -> Option<u32> {
        allocate_cores_for(self.shape.workload, self.shape.critical_path, self.deadline)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub high: BTreeMap<usize, u32>,
    pub m_high: u32,
    pub m_low: i64,
    pub partitions: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskVerdict {
    pub id: usize,
    pub m_i: Option<u32>,
    pub collapsed_pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merges: Option<BTreeMap<NodeId, Vec<NodeId>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub approach: Approach,
    pub schedulable: bool,
    pub reason: Reason,
    pub m_high: u32,
    pub m_low: i64,
    pub per_task: Vec<TaskVerdict>,
    #[serde(skip)]
    pub allocation: Option<Allocation>,
}

impl Verdict {
    pub fn timeout(approach: Approach, cores: u32) -> Self {
        Verdict {
            approach,
            schedulable: false,
            reason: Reason::Timeout,
            m_high: 0,
            m_low: i64::from(cores),
            per_task: Vec::new(),
            allocation: None,
        }
    }
}

/// Allocation and partitioning of already-collapsed tasks.
pub fn analyze_prepared(tasks: &[PreparedTask], cores: u32, approach: Approach) -> Verdict {
    let mut high = BTreeMap::new();
    let mut infeasible = false;
    let mut per_task = Vec::with_capacity(tasks.len());
    for t in tasks {
        let m_i = match t.class {
            Class::High => {
                let m = t.cores();
                match m {
                    Some(m) => {
                        high.insert(t.id, m);
                    }
                    None => infeasible = true,
                }
                m
            }
            Class::Low => None,
        };
        per_task.push(TaskVerdict { id: t.id, m_i, collapsed_pairs: t.collapsed_pairs, merges: t.merges.clone() });
    }
    let m_high: u32 = high.values().sum();
    let m_low = i64::from(cores) - i64::from(m_high);
    let verdict = |reason: Reason, partitions: Vec<Vec<usize>>| Verdict {
        approach,
        schedulable: reason == Reason::Ok,
        reason,
        m_high,
        m_low,
        per_task: per_task.clone(),
        allocation: Some(Allocation { high: high.clone(), m_high, m_low, partitions }),
    };
    if infeasible {
        return verdict(Reason::CriticalPathExceedsDeadline, Vec::new());
    }
    if m_low < 0 {
        return verdict(Reason::InsufficientCores, Vec::new());
    }
    let low: Vec<&PreparedTask> = tasks.iter().filter(|t| t.class == Class::Low).collect();
    let loads: Vec<SeqLoad> = low.iter().map(|t| SeqLoad { wcet: t.shape.workload, period: t.period }).collect();
    let parts = if approach.preemptive() {
        worst_fit_partition(&loads, m_low as usize, |ts| {
            edf_p_test(&ts.iter().map(|t| (t.wcet, t.period)).collect::<Vec<_>>())
        })
    } else {
        worst_fit_partition(&loads, m_low as usize, |ts| {
            edf_np_test(&ts.iter().map(|t| IntTask::pessimistic(t.wcet, t.period)).collect::<Vec<_>>())
        })
    };
    match parts {
        Some(p) => {
            let ids = p.into_iter().map(|core| core.into_iter().map(|k| low[k].id).collect()).collect();
            verdict(Reason::Ok, ids)
        }
        None => verdict(Reason::PartitionFailure, Vec::new()),
    }
}

/// Collapses each task of `set` for `approach`. `Err` once `deadline` passes.
pub fn prepare(
    set: &TaskSet,
    approach: Approach,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<Vec<PreparedTask>, crate::collapse::TimedOut> {
    set.tasks
        .iter()
        .enumerate()
        .map(|(i, task)| {
            let class = class_of(task);
            let Some(order) = approach.ordering() else {
                return Ok(PreparedTask::new(i, class, task));
            };
            let r = dagot_reduce_until(&task.graph, task.deadline, order, sub_seed(seed, Stage::Ordering, i as u64), deadline)?;
            Ok(PreparedTask {
                id: i,
                class,
                shape: r.after,
                period: task.period,
                deadline: task.deadline,
                collapsed_pairs: r.accepted.len(),
                merges: Some(r.merges.history()),
            })
        })
        .collect()
}

/// Full analysis of one set under one approach.
pub fn analyze(set: &TaskSet, approach: Approach, seed: u64, timeout: Option<Duration>) -> Verdict {
    let deadline = timeout.map(|t| Instant::now() + t);
    match prepare(set, approach, seed, deadline) {
        Ok(tasks) => analyze_prepared(&tasks, set.cores, approach),
        Err(_) => Verdict::timeout(approach, set.cores),
    }
}

/// All five approaches. If any collapse-based approach runs out of time,
/// every collapse-based approach is reported as timed out.
pub fn analyze_all(set: &TaskSet, seed: u64, timeout: Option<Duration>) -> Vec<Verdict> {
    let deadline = timeout.map(|t| Instant::now() + t);
    let mut out = Vec::with_capacity(Approach::ALL.len());
    let mut timed_out = false;
    for a in Approach::ALL {
        let v = match prepare(set, a, seed, deadline) {
            Ok(tasks) => analyze_prepared(&tasks, set.cores, a),
            Err(_) => {
                timed_out = true;
                Verdict::timeout(a, set.cores)
            }
        };
        out.push(v);
    }
    if timed_out {
        for v in out.iter_mut().filter(|v| v.approach.ordering().is_some()) {
            *v = Verdict::timeout(v.approach, set.cores);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::tests::{lin, occlusion_graph};
    use crate::taskgraph::{ExecObject, RawGraph, TaskGraph};

    fn chain(costs: &[f64]) -> TaskGraph {
        let mut r = RawGraph::default();
        for (i, c) in costs.iter().enumerate() {
            let id = i as u32 + 1;
            r.object(ExecObject::new(id, lin(*c, 1.0))).node(id, id);
            if id > 1 {
                r.edge(id - 1, id);
            }
        }
        TaskGraph::new(r).unwrap()
    }

    fn set(tasks: Vec<Task>, cores: u32) -> TaskSet {
        TaskSet { tasks, cores }
    }

    #[test]
    fn classification_boundary() {
        let g = chain(&[10.0]);
        let t = |p: f64| Task::new(p, g.clone()).unwrap();
        let s = set(vec![t(5.0), t(10.0), t(40.0)], 4);
        assert_eq!(classify(&s), (vec![0], vec![1, 2]));
    }

    #[test]
    fn core_allocation() {
        assert_eq!(allocate_cores_for(52.0, 32.0, 40.0), Some(3));
        assert_eq!(allocate_cores_for(49.0, 29.0, 40.0), Some(2));
        assert_eq!(allocate_cores_for(50.0, 41.0, 40.0), None);
        assert_eq!(allocate_cores_for(50.0, 40.0, 40.0), None);
        assert_eq!(allocate_cores_for(40.0, 40.0, 40.0), Some(1));
        assert_eq!(allocate_cores_for(30.0, 30.0, 40.0), Some(1));
    }

    #[test]
    fn insufficient_cores() {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let v = analyze(&set(vec![t.clone(), t], 5), Approach::BaselineNp, 0, None);
        assert_eq!(v.reason, Reason::InsufficientCores);
        assert_eq!(v.m_high, 6);
        assert!(!v.schedulable);
    }

    #[test]
    fn collapse_saves_a_core() {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let s = set(vec![t], 2);
        assert_eq!(analyze(&s, Approach::BaselineNp, 0, None).reason, Reason::InsufficientCores);
        let v = analyze(&s, Approach::Least, 0, None);
        assert_eq!(v.reason, Reason::Ok);
        assert_eq!(v.m_high, 2);
        assert_eq!(v.per_task[0].collapsed_pairs, 1);
    }

    #[test]
    fn infeasible_baseline_can_become_feasible() {
        // L = 32 > D = 30, and x ⋈ y shortens the path to 29.
        let t = Task::new(30.0, occlusion_graph()).unwrap();
        let s = set(vec![t], 32);
        let b = analyze(&s, Approach::BaselineNp, 0, None);
        assert_eq!(b.reason, Reason::CriticalPathExceedsDeadline);
        let v = analyze(&s, Approach::Least, 0, None);
        assert_eq!(v.reason, Reason::Ok);
    }

    #[test]
    fn empty_low_set_fits() {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let v = analyze(&set(vec![t], 3), Approach::BaselineNp, 0, None);
        assert_eq!(v.reason, Reason::Ok);
        assert_eq!(v.m_low, 0);
    }

    #[test]
    fn low_tasks_need_shared_cores() {
        let t = Task::new(20.0, chain(&[3.0, 3.0])).unwrap();
        let s = set(vec![t.clone(), t.clone(), t], 1);
        assert_eq!(analyze(&s, Approach::BaselineP, 0, None).reason, Reason::Ok);
        let s0 = TaskSet { cores: 0, ..s };
        assert_eq!(analyze(&s0, Approach::BaselineP, 0, None).reason, Reason::PartitionFailure);
    }

    #[test]
    fn zero_timeout_marks_all_collapse_approaches() {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let vs = analyze_all(&set(vec![t], 8), 0, Some(Duration::ZERO));
        for v in vs {
            if v.approach.ordering().is_some() {
                assert_eq!(v.reason, Reason::Timeout);
            } else {
                assert_eq!(v.reason, Reason::Ok);
            }
        }
    }

    #[test]
    fn verdict_json_shape() {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let v = analyze(&set(vec![t], 3), Approach::Greatest, 0, None);
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["approach"], "OT-G");
        assert_eq!(j["reason"], "ok");
        assert_eq!(j["per_task"][0]["m_i"], 2);
        assert_eq!(j["per_task"][0]["merges"]["3"][0], 4);
    }

    #[test]
    fn approach_names_round_trip() {
        for a in Approach::ALL {
            assert_eq!(a.as_str().parse::<Approach>().unwrap(), a);
        }
    }
}
