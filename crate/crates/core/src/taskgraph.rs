//! DAG task representation, structural validation, critical path and workload.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wceto::{Cycles, WcetoError, WcetoFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

/// An executable object and the WCETO function shared by all its threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecObject {
    pub id: ObjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub wceto: WcetoFn,
}

impl ExecObject {
    pub fn new(id: u32, wceto: WcetoFn) -> Self {
        ExecObject { id: ObjectId(id), name: None, wceto }
    }

    pub fn named(id: u32, name: &str, wceto: WcetoFn) -> Self {
        ExecObject { id: ObjectId(id), name: Some(name.to_string()), wceto }
    }

    /// Zero-cost objects mark added source/sink nodes and never collapse.
    pub fn is_structural(&self) -> bool {
        matches!(self.wceto, WcetoFn::Zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub object: ObjectId,
    pub threads: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("graph contains a cycle")]
    Cycle,
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate object {0:?}")]
    DuplicateObject(ObjectId),
    #[error("node {0} references unknown object {1:?}")]
    UnknownObject(NodeId, ObjectId),
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {0} has zero threads")]
    ZeroThreads(NodeId),
    #[error("graph must have exactly one source and one sink")]
    NotSingleSourceSink,
    #[error("node {node}: {source}")]
    Wceto { node: NodeId, source: WcetoError },
    #[error("invalid WCETO for object {0:?}: {1}")]
    BadObject(ObjectId, WcetoError),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("deadline {deadline} must equal period {period}")]
    NotImplicitDeadline { period: f64, deadline: f64 },
}

/// Unvalidated node/edge collection, the input of [`augment_source_sink`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawGraph {
    pub objects: Vec<ExecObject>,
    pub nodes: Vec<(NodeId, Node)>,
    pub edges: Vec<(NodeId, NodeId)>,
}

impl RawGraph {
    pub fn object(&mut self, obj: ExecObject) -> &mut Self {
        self.objects.push(obj);
        self
    }

    pub fn node(&mut self, id: u32, object: u32) -> &mut Self {
        self.nodes.push((NodeId(id), Node { object: ObjectId(object), threads: 1 }));
        self
    }

    pub fn edge(&mut self, from: u32, to: u32) -> &mut Self {
        self.edges.push((NodeId(from), NodeId(to)));
        self
    }
}

/// A DAG-OT task graph.
///
/// Constructed graphs are acyclic with one source and one sink. Only
/// [`crate::collapse::collapse`] may produce a cyclic value, which callers
/// must check with [`TaskGraph::is_acyclic`] before further analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraph {
    objects: Arc<BTreeMap<ObjectId, ExecObject>>,
    nodes: BTreeMap<NodeId, Node>,
    succ: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pred: BTreeMap<NodeId, BTreeSet<NodeId>>,
    source: NodeId,
    sink: NodeId,
}

impl TaskGraph {
    /// Validates `raw` and wires an empty source and sink where needed.
    pub fn new(raw: RawGraph) -> Result<Self, GraphError> {
        augment_source_sink(raw)
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(k, v)| (*k, v))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.succ.iter().flat_map(|(a, bs)| bs.iter().map(move |b| (*a, *b)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.values().map(BTreeSet::len).sum()
    }

    pub fn successors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succ.get(&id).into_iter().flatten().copied()
    }

    pub fn predecessors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.pred.get(&id).into_iter().flatten().copied()
    }

    pub fn objects(&self) -> impl Iterator<Item = &ExecObject> + '_ {
        self.objects.values()
    }

    pub fn object(&self, id: ObjectId) -> &ExecObject {
        &self.objects[&id]
    }

    pub fn wceto_of(&self, node: NodeId) -> &WcetoFn {
        &self.object(self.nodes[&node].object).wceto
    }

    pub fn is_structural(&self, node: NodeId) -> bool {
        self.object(self.nodes[&node].object).is_structural()
    }

    /// `c_v(η_v)` for a node of this graph.
    pub fn cost(&self, id: NodeId) -> Cycles {
        let n = &self.nodes[&id];
        // Construction and collapse both reject thread counts the WCETO cannot evaluate.
        self.object(n.object).wceto.eval(n.threads).expect("validated thread count")
    }

    /// Total thread count per object, excluding structural objects.
    pub fn threads_per_object(&self) -> BTreeMap<ObjectId, u32> {
        let mut out = BTreeMap::new();
        for n in self.nodes.values() {
            if !self.object(n.object).is_structural() {
                *out.entry(n.object).or_insert(0) += n.threads;
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Kahn order, smallest ready NodeId first. `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: BTreeMap<NodeId, usize> =
            self.nodes.keys().map(|k| (*k, self.pred.get(k).map_or(0, BTreeSet::len))).collect();
        let mut ready: BinaryHeap<Reverse<NodeId>> =
            indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| Reverse(*k)).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(Reverse(n)) = ready.pop() {
            order.push(n);
            for s in self.successors(n) {
                let d = indeg.get_mut(&s).expect("edge endpoint exists");
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse(s));
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Builds a graph from already-merged parts. Used by collapse.
    pub(crate) fn from_parts(
        objects: Arc<BTreeMap<ObjectId, ExecObject>>,
        nodes: BTreeMap<NodeId, Node>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        source: NodeId,
        sink: NodeId,
    ) -> Self {
        let mut succ: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut pred: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for (a, b) in edges {
            succ.entry(a).or_default().insert(b);
            pred.entry(b).or_default().insert(a);
        }
        TaskGraph { objects, nodes, succ, pred, source, sink }
    }

    pub(crate) fn shared_objects(&self) -> Arc<BTreeMap<ObjectId, ExecObject>> {
        Arc::clone(&self.objects)
    }

    pub(crate) fn node_map(&self) -> &BTreeMap<NodeId, Node> {
        &self.nodes
    }

    /// Back to an unvalidated collection, e.g. for serialization.
    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            objects: self.objects.values().cloned().collect(),
            nodes: self.nodes.iter().map(|(k, v)| (*k, *v)).collect(),
            edges: self.edges().collect(),
        }
    }
}

/// True iff the directed graph over `nodes` with `edges` has a cycle.
pub fn detect_cycle(nodes: &[NodeId], edges: &[(NodeId, NodeId)]) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = nodes.iter().map(|n| (*n, Vec::new())).collect();
    for (a, b) in edges {
        adj.entry(*a).or_default().push(*b);
        adj.entry(*b).or_default();
    }
    let mut mark: BTreeMap<NodeId, Mark> = adj.keys().map(|k| (*k, Mark::New)).collect();
    let roots: Vec<NodeId> = adj.keys().copied().collect();
    for root in roots {
        if mark[&root] != Mark::New {
            continue;
        }
        // Iterative DFS; the stack holds (node, index of next successor).
        let mut stack = vec![(root, 0usize)];
        mark.insert(root, Mark::Open);
        while let Some((n, i)) = stack.last_mut() {
            let n = *n;
            if let Some(&s) = adj[&n].get(*i) {
                *i += 1;
                match mark[&s] {
                    Mark::Open => return true,
                    Mark::New => {
                        mark.insert(s, Mark::Open);
                        stack.push((s, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(n, Mark::Done);
                stack.pop();
            }
        }
    }
    false
}

/// Validates a raw graph and adds an empty source and/or sink when the graph
/// has several of either.
pub fn augment_source_sink(raw: RawGraph) -> Result<TaskGraph, GraphError> {
    if raw.nodes.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut objects = BTreeMap::new();
    for o in raw.objects {
        o.wceto.validate().map_err(|e| GraphError::BadObject(o.id, e))?;
        if objects.insert(o.id, o.clone()).is_some() {
            return Err(GraphError::DuplicateObject(o.id));
        }
    }
    let mut nodes = BTreeMap::new();
    for (id, n) in raw.nodes {
        if n.threads == 0 {
            return Err(GraphError::ZeroThreads(id));
        }
        let obj = objects.get(&n.object).ok_or(GraphError::UnknownObject(id, n.object))?;
        obj.wceto.eval(n.threads).map_err(|source| GraphError::Wceto { node: id, source })?;
        if nodes.insert(id, n).is_some() {
            return Err(GraphError::DuplicateNode(id));
        }
    }
    let mut edges = BTreeSet::new();
    for (a, b) in raw.edges {
        for x in [a, b] {
            if !nodes.contains_key(&x) {
                return Err(GraphError::UnknownNode(x));
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        edges.insert((a, b));
    }
    let ids: Vec<NodeId> = nodes.keys().copied().collect();
    let edge_list: Vec<(NodeId, NodeId)> = edges.iter().copied().collect();
    if detect_cycle(&ids, &edge_list) {
        return Err(GraphError::Cycle);
    }

    let has_in: BTreeSet<NodeId> = edges.iter().map(|e| e.1).collect();
    let has_out: BTreeSet<NodeId> = edges.iter().map(|e| e.0).collect();
    let sources: Vec<NodeId> = ids.iter().copied().filter(|n| !has_in.contains(n)).collect();
    let sinks: Vec<NodeId> = ids.iter().copied().filter(|n| !has_out.contains(n)).collect();

    let mut next_node = ids.last().map_or(0, |n| n.0) + 1;
    let mut next_obj = objects.keys().next_back().map_or(0, |o| o.0) + 1;
    let mut add_empty = |nodes: &mut BTreeMap<NodeId, Node>, objects: &mut BTreeMap<ObjectId, ExecObject>| {
        let id = NodeId(next_node);
        let obj = ObjectId(next_obj);
        next_node += 1;
        next_obj += 1;
        objects.insert(obj, ExecObject { id: obj, name: None, wceto: WcetoFn::Zero });
        nodes.insert(id, Node { object: obj, threads: 1 });
        id
    };

    let source = if let [s] = sources[..] {
        s
    } else {
        let s = add_empty(&mut nodes, &mut objects);
        edges.extend(sources.iter().map(|x| (s, *x)));
        s
    };
    let sink = if let [t] = sinks[..] {
        t
    } else {
        let t = add_empty(&mut nodes, &mut objects);
        edges.extend(sinks.iter().map(|x| (*x, t)));
        t
    };
    Ok(TaskGraph::from_parts(Arc::new(objects), nodes, edges, source, sink))
}

/// Maximum-weight source-to-sink path and its length.
///
/// Among equally long predecessor choices the smallest NodeId wins.
pub fn critical_path(graph: &TaskGraph) -> Result<(Vec<NodeId>, Cycles), GraphError> {
    let order = graph.topological_order().ok_or(GraphError::Cycle)?;
    let mut dist: BTreeMap<NodeId, Cycles> = BTreeMap::new();
    let mut via: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for &n in &order {
        let mut best: Option<(Cycles, NodeId)> = None;
        for p in graph.predecessors(n) {
            let d = dist[&p];
            // Predecessors iterate in ascending id, so strict > keeps the smallest on ties.
            if best.is_none_or(|(b, _)| d > b) {
                best = Some((d, p));
            }
        }
        let base = best.map_or(0.0, |(d, p)| {
            via.insert(n, p);
            d
        });
        dist.insert(n, base + graph.cost(n));
    }
    let sink = graph.sink();
    let mut path = vec![sink];
    let mut cur = sink;
    while let Some(&p) = via.get(&cur) {
        path.push(p);
        cur = p;
    }
    path.reverse();
    Ok((path, dist[&sink]))
}

pub fn critical_path_length(graph: &TaskGraph) -> Result<Cycles, GraphError> {
    critical_path(graph).map(|(_, l)| l)
}

/// Sum of `c_v(η_v)` over all nodes, in NodeId order.
pub fn workload(graph: &TaskGraph) -> Cycles {
    graph.node_ids().map(|n| graph.cost(n)).sum()
}

/// A DAG task with an implicit deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub period: Cycles,
    pub deadline: Cycles,
    pub graph: TaskGraph,
}

impl Task {
    pub fn new(period: Cycles, graph: TaskGraph) -> Result<Self, GraphError> {
        Self::with_deadline(period, period, graph)
    }

    pub fn with_deadline(period: Cycles, deadline: Cycles, graph: TaskGraph) -> Result<Self, GraphError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(GraphError::BadPeriod(period));
        }
        if deadline != period {
            return Err(GraphError::NotImplicitDeadline { period, deadline });
        }
        Ok(Task { period, deadline, graph })
    }

    /// Same timing, different graph.
    pub fn with_graph(&self, graph: TaskGraph) -> Self {
        Task { period: self.period, deadline: self.deadline, graph }
    }

    pub fn workload(&self) -> Cycles {
        workload(&self.graph)
    }

    pub fn critical_path_length(&self) -> Cycles {
        critical_path_length(&self.graph).expect("task graphs are acyclic")
    }
}

pub fn utilization(task: &Task) -> f64 {
    task.workload() / task.period
}

/// Index-based copy of a graph for cheap what-if collapses.
///
/// `trial` evaluates the workload and critical path of `u ⋈ v` without
/// building the collapsed graph. Sums are accumulated in the same order as
/// [`workload`] and [`critical_path`] on the materialized result, so both
/// paths agree bit for bit.
pub(crate) struct DenseView<'g> {
    graph: &'g TaskGraph,
    pub(crate) ids: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    cost: Vec<Cycles>,
    succ: Vec<Vec<usize>>,
    sink: usize,
}

/// Outcome of a trial collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Trial {
    pub workload: Cycles,
    pub critical_path: Cycles,
}

impl<'g> DenseView<'g> {
    pub(crate) fn new(graph: &'g TaskGraph) -> Self {
        let ids: Vec<NodeId> = graph.node_ids().collect();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let cost = ids.iter().map(|n| graph.cost(*n)).collect();
        let succ = ids.iter().map(|n| graph.successors(*n).map(|s| index[&s]).collect()).collect();
        let sink = index[&graph.sink()];
        DenseView { graph, ids, index, cost, succ, sink }
    }

    pub(crate) fn index_of(&self, id: NodeId) -> usize {
        self.index[&id]
    }

    /// Workload and critical path of the graph with `v` merged into `u`.
    /// `None` if the merged threads cannot be evaluated or the result is cyclic.
    pub(crate) fn trial(&self, u: usize, v: usize) -> Option<Trial> {
        let (nu, nv) = (self.graph.nodes[&self.ids[u]], self.graph.nodes[&self.ids[v]]);
        let merged = self.graph.object(nu.object).wceto.eval(nu.threads + nv.threads).ok()?;
        let n = self.ids.len();
        let alias = |x: usize| if x == v { u } else { x };
        let weight = |x: usize| if x == u { merged } else { self.cost[x] };

        // Node index order is NodeId order, matching `workload`.
        let workload = (0..n).filter(|&x| x != v).map(weight).sum();

        // Kahn over the aliased graph. Duplicate edges count on both sides.
        let mut indeg = vec![0usize; n];
        for a in 0..n {
            for &b in &self.succ[a] {
                let (a2, b2) = (alias(a), alias(b));
                if a2 != b2 {
                    indeg[b2] += 1;
                }
            }
        }
        let mut best_in = vec![0.0f64; n];
        let mut dist = vec![0.0f64; n];
        let mut stack: Vec<usize> = (0..n).filter(|&x| x != v && indeg[x] == 0).collect();
        let mut seen = 0;
        while let Some(x) = stack.pop() {
            seen += 1;
            dist[x] = best_in[x] + weight(x);
            let outs = if x == u { [&self.succ[u][..], &self.succ[v][..]] } else { [&self.succ[x][..], &[][..]] };
            for &y in outs.into_iter().flatten() {
                let y = alias(y);
                if y == x {
                    continue;
                }
                if dist[x] > best_in[y] {
                    best_in[y] = dist[x];
                }
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    stack.push(y);
                }
            }
        }
        if seen != n - 1 {
            return None;
        }
        Some(Trial { workload, critical_path: dist[alias(self.sink)] })
    }
}
