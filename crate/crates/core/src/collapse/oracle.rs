use std::collections::{BTreeMap, BTreeSet};

use super::{candidates, collapse, real_core_allocation, CollapseError, MergeMap, RealCores};
use crate::taskgraph::{critical_path_length, workload, NodeId, TaskGraph};
use crate::wceto::Cycles;

pub const DEFAULT_ORACLE_LIMIT: usize = 8;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub graph: TaskGraph,
    pub cores: RealCores,
    pub merges: MergeMap,
}

/// Least positive real core allocation reachable by any sequence of
/// acyclic collapses.
///
/// The collapsed graph depends only on which nodes end up merged, so the
/// search visits each merge partition once. Returns the input and its own
/// allocation when no reachable state has a positive allocation.
pub fn optimal_collapse_oracle(graph: &TaskGraph, d: Cycles, limit: usize) -> Result<OracleResult, CollapseError> {
    let pairs: Vec<(NodeId, NodeId)> = candidates(graph).into_iter().map(|p| (p.a, p.b)).collect();
    if pairs.len() > limit {
        return Err(CollapseError::OracleLimit { found: pairs.len(), limit });
    }
    let own = cores_of(graph, d);
    let mut best = OracleResult { graph: graph.clone(), cores: own, merges: MergeMap::new() };
    let mut found_positive = own > 0.0;
    let mut seen: BTreeSet<BTreeMap<NodeId, Vec<NodeId>>> = BTreeSet::new();
    let mut stack = vec![(graph.clone(), MergeMap::new())];
    seen.insert(BTreeMap::new());
    while let Some((g, merges)) = stack.pop() {
        for &(a, b) in &pairs {
            let (ra, rb) = (merges.find(a), merges.find(b));
            if ra == rb {
                continue;
            }
            let mut next = merges.clone();
            next.union(ra, rb);
            if !seen.insert(next.history()) {
                continue;
            }
            let Ok(h) = collapse(&g, ra, rb) else { continue };
            if !h.is_acyclic() {
                continue;
            }
            let m = cores_of(&h, d);
            if m > 0.0 && (!found_positive || m < best.cores) {
                best = OracleResult { graph: h.clone(), cores: m, merges: next.clone() };
                found_positive = true;
            }
            stack.push((h, next));
        }
    }
    Ok(best)
}

fn cores_of(g: &TaskGraph, d: Cycles) -> RealCores {
    real_core_allocation(workload(g), critical_path_length(g).expect("acyclic"), d)
}
