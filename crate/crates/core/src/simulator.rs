//! Greedy non-preemptive list scheduling of one DAG-OT job on dedicated cores.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::taskgraph::{critical_path_length, workload, NodeId, TaskGraph};
use crate::wceto::Cycles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Longest remaining path through the node first, then smallest NodeId.
    LongestPath,
    /// Uniformly random ready node, seeded.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub tie_break: TieBreak,
    /// Scales each node by a uniform factor in `[floor, 1]` when set.
    pub early_completion: Option<(f64, u64)>,
}

impl SimOptions {
    pub fn new(tie_break: TieBreak) -> Self {
        SimOptions { tie_break, early_completion: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Start,
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEvent {
    pub time: Cycles,
    pub core: usize,
    pub node: NodeId,
    pub event: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub events: Vec<SimEvent>,
    pub makespan: Cycles,
    pub per_core_busy: Vec<Cycles>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    pub makespan: Cycles,
    pub workload: Cycles,
    pub bound: Cycles,
    pub deadline_met: bool,
}

pub fn simulate(graph: &TaskGraph, m: usize, tie_break: TieBreak) -> SimTrace {
    simulate_with(graph, m, SimOptions::new(tie_break))
}

/// Event-driven simulation on `m` cores.
///
/// Whenever a core is idle and a node is ready, the highest-priority ready
/// node starts and runs to completion. Idle cores are filled in index order
/// and simultaneous completions are processed in core order.
pub fn simulate_with(graph: &TaskGraph, m: usize, opts: SimOptions) -> SimTrace {
    assert!(m >= 1, "at least one core");
    let ids: Vec<NodeId> = graph.node_ids().collect();
    let mut duration: BTreeMap<NodeId, Cycles> = ids.iter().map(|&n| (n, graph.cost(n))).collect();
    if let Some((floor, seed)) = opts.early_completion {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for d in duration.values_mut() {
            *d *= rng.gen_range(floor..=1.0);
        }
    }
    let level = bottom_levels(graph);
    let mut pick_rng = match opts.tie_break {
        TieBreak::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        TieBreak::LongestPath => None,
    };

    let mut waiting: BTreeMap<NodeId, usize> = ids.iter().map(|&n| (n, graph.predecessors(n).count())).collect();
    let mut ready: Vec<NodeId> = ids.iter().copied().filter(|n| waiting[n] == 0).collect();
    let mut running: Vec<Option<(Cycles, NodeId)>> = vec![None; m];
    let mut busy = vec![0.0; m];
    let mut events = Vec::new();
    let mut now = 0.0;

    loop {
        for (core, slot) in running.iter_mut().enumerate() {
            if slot.is_some() || ready.is_empty() {
                continue;
            }
            ready.sort();
            let k = match &mut pick_rng {
                Some(rng) => rng.gen_range(0..ready.len()),
                // Ties keep the first, i.e. smallest NodeId, since `ready` is sorted.
                None => (0..ready.len()).fold(0, |best, i| if level[&ready[i]] > level[&ready[best]] { i } else { best }),
            };
            let n = ready.remove(k);
            events.push(SimEvent { time: now, core, node: n, event: EventKind::Start });
            *slot = Some((now + duration[&n], n));
        }
        let Some(next) = running.iter().flatten().map(|r| r.0).reduce(f64::min) else { break };
        now = next;
        for core in 0..m {
            let Some((finish, n)) = running[core] else { continue };
            if finish != now {
                continue;
            }
            running[core] = None;
            busy[core] += duration[&n];
            events.push(SimEvent { time: now, core, node: n, event: EventKind::Finish });
            for s in graph.successors(n) {
                let w = waiting.get_mut(&s).expect("successor exists");
                *w -= 1;
                if *w == 0 {
                    ready.push(s);
                }
            }
        }
    }
    debug_assert!(waiting.values().all(|&w| w == 0), "acyclic graphs finish");
    SimTrace { events, makespan: now, per_core_busy: busy }
}

/// Longest path from each node to the sink, including the node itself.
fn bottom_levels(graph: &TaskGraph) -> BTreeMap<NodeId, Cycles> {
    let order = graph.topological_order().expect("acyclic graph");
    let mut level = BTreeMap::new();
    for &n in order.iter().rev() {
        let below = graph.successors(n).map(|s| level[&s]).fold(0.0, f64::max);
        level.insert(n, graph.cost(n) + below);
    }
    level
}

/// `L + (C − L)/m`.
pub fn graham_bound(graph: &TaskGraph, m: usize) -> Cycles {
    let c = workload(graph);
    let l = critical_path_length(graph).expect("acyclic graph");
    l + (c - l) / m as f64
}

/// Whether the makespan respects the work-conserving bound, up to rounding.
pub fn check_graham(trace: &SimTrace, graph: &TaskGraph, m: usize) -> bool {
    let bound = graham_bound(graph, m);
    trace.makespan <= bound + 1e-9 * bound.max(1.0)
}

pub fn measure_workload(trace: &SimTrace) -> Cycles {
    trace.per_core_busy.iter().sum()
}

pub fn summarize(trace: &SimTrace, graph: &TaskGraph, m: usize, deadline: Cycles) -> SimSummary {
    SimSummary {
        makespan: trace.makespan,
        workload: measure_workload(trace),
        bound: graham_bound(graph, m),
        deadline_met: trace.makespan <= deadline,
    }
}

/// `time,core,node,event` rows.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "core", "node", "event"])?;
    for e in &trace.events {
        let kind = match e.event {
            EventKind::Start => "start",
            EventKind::Finish => "finish",
        };
        w.write_record([e.time.to_string(), e.core.to_string(), e.node.to_string(), kind.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
