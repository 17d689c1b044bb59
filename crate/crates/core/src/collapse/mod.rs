//! Node collapse: candidates, the collapse operator, the beneficial-collapse
//! gate, the dedicated-core reduction loop and low-utilization serialization.

mod merge;
mod oracle;
mod order;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgraph::{critical_path_length, workload, DenseView, NodeId, Task, TaskGraph, Trial};
use crate::wceto::Cycles;

pub use merge::MergeMap;
pub use oracle::{optimal_collapse_oracle, OracleResult, DEFAULT_ORACLE_LIMIT};
pub use order::{order_arbitrary, order_greatest_benefit, order_least_penalty};

/// Core allocation before the ceiling. May be negative or infinite.
pub type RealCores = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("nodes {0} and {1} are not collapse candidates")]
    NotCandidates(NodeId, NodeId),
    #[error("node {0} is not in the graph")]
    Missing(NodeId),
    #[error("merged thread count for {0} and {1} is outside the WCETO domain")]
    ThreadRange(NodeId, NodeId),
    #[error("{found} candidate pairs exceed the oracle limit of {limit}")]
    OracleLimit { found: usize, limit: usize },
}

/// Two nodes sharing one executable object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePair {
    pub a: NodeId,
    pub b: NodeId,
    /// Workload saved by collapsing the pair in the original graph.
    pub delta: Cycles,
    /// Critical-path change of the same collapse; set by the penalty ordering.
    pub penalty: Option<Cycles>,
}

/// All same-object node pairs with `a < b`, ascending.
///
/// Structural nodes and objects with a growth factor above one are skipped.
pub fn candidates(graph: &TaskGraph) -> Vec<CandidatePair> {
    let mut by_object: BTreeMap<_, Vec<NodeId>> = BTreeMap::new();
    for (id, n) in graph.nodes() {
        if graph.object(n.object).wceto.collapsible() {
            by_object.entry(n.object).or_default().push(id);
        }
    }
    let mut out = Vec::new();
    for ids in by_object.values() {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                out.push(CandidatePair { a, b, delta: pair_delta(graph, a, b), penalty: None });
            }
        }
    }
    out.sort_by_key(|p| (p.a, p.b));
    out
}

/// `c_a(η_a) + c_b(η_b) − c_a(η_a + η_b)`; `-∞` when the merged count cannot be evaluated.
fn pair_delta(graph: &TaskGraph, a: NodeId, b: NodeId) -> Cycles {
    let threads = graph.node(a).unwrap().threads + graph.node(b).unwrap().threads;
    match graph.wceto_of(a).eval(threads) {
        Ok(merged) => graph.cost(a) + graph.cost(b) - merged,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn check_pair(graph: &TaskGraph, u: NodeId, v: NodeId) -> Result<(), CollapseError> {
    let nu = graph.node(u).ok_or(CollapseError::Missing(u))?;
    let nv = graph.node(v).ok_or(CollapseError::Missing(v))?;
    if u == v || nu.object != nv.object || graph.is_structural(u) {
        return Err(CollapseError::NotCandidates(u, v));
    }
    Ok(())
}

/// `û ← u ⋈ v`. The smaller id survives and carries the summed threads.
///
/// Edges of both nodes are rewired to the survivor and edges between them
/// vanish. The result may be cyclic.
pub fn collapse(graph: &TaskGraph, u: NodeId, v: NodeId) -> Result<TaskGraph, CollapseError> {
    check_pair(graph, u, v)?;
    let (keep, gone) = if u < v { (u, v) } else { (v, u) };
    let mut nodes = graph.node_map().clone();
    let absorbed = nodes.remove(&gone).expect("checked");
    let survivor = nodes.get_mut(&keep).expect("checked");
    survivor.threads += absorbed.threads;
    graph.wceto_of(keep).eval(survivor.threads).map_err(|_| CollapseError::ThreadRange(u, v))?;
    let alias = |x: NodeId| if x == gone { keep } else { x };
    let edges = graph.edges().map(|(a, b)| (alias(a), alias(b))).filter(|(a, b)| a != b);
    Ok(TaskGraph::from_parts(
        graph.shared_objects(),
        nodes,
        edges.collect::<Vec<_>>(),
        alias(graph.source()),
        alias(graph.sink()),
    ))
}

/// `(C − L)/(D − L)` without the ceiling.
///
/// At `L = D` the formula divides by zero: a chain that exactly fills the
/// deadline needs one core, anything heavier needs infinitely many.
pub fn real_core_allocation(c: Cycles, l: Cycles, d: Cycles) -> RealCores {
    if l == d {
        return if c > l { f64::INFINITY } else { 1.0 };
    }
    (c - l) / (d - l)
}

pub fn improves(m: RealCores, m_hat: RealCores) -> bool {
    if m > 0.0 {
        m_hat > 0.0 && m_hat <= m
    } else {
        m_hat >= m
    }
}

fn accept(c: Cycles, l: Cycles, d: Cycles, trial: Option<Trial>) -> bool {
    let Some(t) = trial else { return false };
    let keeps_feasible = l > d || t.critical_path <= d;
    keeps_feasible && improves(real_core_allocation(c, l, d), real_core_allocation(t.workload, t.critical_path, d))
}

/// Whether `u ⋈ v` keeps the graph acyclic, keeps a feasible critical path
/// feasible and does not worsen the real-valued core allocation.
pub fn beneficial(graph: &TaskGraph, u: NodeId, v: NodeId, d: Cycles) -> bool {
    if check_pair(graph, u, v).is_err() {
        return false;
    }
    let view = DenseView::new(graph);
    let (keep, gone) = if u < v { (u, v) } else { (v, u) };
    let trial = view.trial(view.index_of(keep), view.index_of(gone));
    let l = critical_path_length(graph).expect("acyclic input");
    accept(workload(graph), l, d, trial)
}

/// Candidate ordering heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseOrder {
    Arbitrary,
    Benefit,
    Penalty,
}

impl CollapseOrder {
    pub const ALL: [CollapseOrder; 3] = [CollapseOrder::Arbitrary, CollapseOrder::Benefit, CollapseOrder::Penalty];

    pub fn as_str(self) -> &'static str {
        match self {
            CollapseOrder::Arbitrary => "arbitrary",
            CollapseOrder::Benefit => "benefit",
            CollapseOrder::Penalty => "penalty",
        }
    }

    pub fn apply(self, pairs: Vec<CandidatePair>, graph: &TaskGraph, seed: u64) -> Vec<CandidatePair> {
        match self {
            CollapseOrder::Arbitrary => order_arbitrary(pairs, seed),
            CollapseOrder::Benefit => order_greatest_benefit(pairs),
            CollapseOrder::Penalty => order_least_penalty(pairs, graph),
        }
    }
}

impl fmt::Display for CollapseOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollapseOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arbitrary" => Ok(CollapseOrder::Arbitrary),
            "benefit" => Ok(CollapseOrder::Benefit),
            "penalty" => Ok(CollapseOrder::Penalty),
            other => Err(format!("unknown ordering {other:?}")),
        }
    }
}

/// Workload, critical path and real core allocation of a graph at deadline D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shape {
    pub workload: Cycles,
    pub critical_path: Cycles,
    pub cores: RealCores,
}

impl Shape {
    pub fn of(graph: &TaskGraph, d: Cycles) -> Self {
        let c = workload(graph);
        let l = critical_path_length(graph).expect("acyclic graph");
        Shape { workload: c, critical_path: l, cores: real_core_allocation(c, l, d) }
    }
}

/// Output of [`dagot_reduce`].
#[derive(Debug, Clone)]
pub struct Reduction {
    pub graph: TaskGraph,
    pub plan: Vec<CandidatePair>,
    pub merges: MergeMap,
    /// Accepted collapses as (survivor, absorbed) in acceptance order.
    pub accepted: Vec<(NodeId, NodeId)>,
    pub before: Shape,
    pub after: Shape,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("collapse exceeded its time budget")]
pub struct TimedOut;

/// Dedicated-core reduction of one graph.
///
/// Candidates are computed and ordered once. Each pair is resolved to the
/// current representatives of its endpoints; pairs inside one merged group
/// are skipped and the rest are collapsed iff beneficial.
pub fn dagot_reduce(graph: &TaskGraph, d: Cycles, order: CollapseOrder, seed: u64) -> Reduction {
    dagot_reduce_until(graph, d, order, seed, None).expect("no deadline")
}

/// [`dagot_reduce`] that gives up once `deadline` has passed.
pub fn dagot_reduce_until(
    graph: &TaskGraph,
    d: Cycles,
    order: CollapseOrder,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<Reduction, TimedOut> {
    let before = Shape::of(graph, d);
    let plan = order.apply(candidates(graph), graph, seed);
    let mut merges = MergeMap::new();
    let mut accepted = Vec::new();
    let mut current = graph.clone();
    let (mut c, mut l) = (before.workload, before.critical_path);
    let mut next = 0;
    while next < plan.len() {
        let view = DenseView::new(&current);
        let mut hit = None;
        while next < plan.len() {
            if deadline.is_some_and(|t| Instant::now() >= t) {
                return Err(TimedOut);
            }
            let p = &plan[next];
            next += 1;
            let (a, b) = (merges.find(p.a), merges.find(p.b));
            if a == b {
                continue;
            }
            let (u, v) = (a.min(b), a.max(b));
            let trial = view.trial(view.index_of(u), view.index_of(v));
            if accept(c, l, d, trial) {
                hit = Some((u, v, trial.expect("accepted trials exist")));
                break;
            }
        }
        drop(view);
        let Some((u, v, t)) = hit else { break };
        current = collapse(&current, u, v).expect("resolved pair is a candidate");
        merges.union(u, v);
        accepted.push((u, v));
        c = t.workload;
        l = t.critical_path;
    }
    let after = Shape { workload: c, critical_path: l, cores: real_core_allocation(c, l, d) };
    debug_assert_eq!(after, Shape::of(&current, d));
    Ok(Reduction { graph: current, plan, merges, accepted, before, after })
}

/// A low-utilization task collapsed and flattened to one sequential job.
#[derive(Debug, Clone)]
pub struct SeqTask {
    /// Node execution order, a topological sort of the collapsed graph.
    pub order: Vec<NodeId>,
    /// Sequential WCET, the collapsed workload.
    pub wcet: Cycles,
    pub period: Cycles,
    pub deadline: Cycles,
    pub reduction: Reduction,
}

impl SeqTask {
    pub fn infeasible(&self) -> bool {
        self.wcet > self.deadline
    }

    pub fn utilization(&self) -> f64 {
        self.wcet / self.period
    }
}

/// Collapses every beneficial candidate, then orders nodes for one core.
pub fn serialize_low_util(task: &Task, order: CollapseOrder, seed: u64) -> SeqTask {
    let reduction = dagot_reduce(&task.graph, task.deadline, order, seed);
    seq_from_reduction(task, reduction)
}

pub(crate) fn seq_from_reduction(task: &Task, reduction: Reduction) -> SeqTask {
    let order = reduction.graph.topological_order().expect("reduced graphs are acyclic");
    SeqTask {
        order,
        wcet: reduction.after.workload,
        period: task.period,
        deadline: task.deadline,
        reduction,
    }
}
