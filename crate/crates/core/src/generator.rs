//! Synthetic task and task-set generation.
//!
//! Graphs are created, given executable objects and WCETO functions, timed
//! to a target utilization, filtered, collapsed under each ordering into
//! aligned pools, and finally assembled into task sets.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collapse::{dagot_reduce, CollapseOrder};
use crate::federated::{allocate_cores, TaskSet};
use crate::rng::{stage_rng, sub_seed, Stage};
use crate::taskgraph::{utilization, ExecObject, Node, NodeId, ObjectId, RawGraph, Task, TaskGraph};
use crate::wceto::WcetoFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub nodes_per_graph: Vec<u32>,
    pub edge_prob: Vec<f64>,
    pub graph_iters: u32,
    pub objects_per_task: Vec<u32>,
    pub growth_cap: Vec<f64>,
    pub growth_floor: f64,
    pub wcet_range: [u32; 2],
    pub task_utils: Vec<f64>,
    pub set_utils: Vec<f64>,
    pub core_counts: Vec<u32>,
    pub sets_per_point: u32,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            nodes_per_graph: vec![16, 32, 64],
            edge_prob: vec![0.02, 0.06, 0.12],
            graph_iters: 10,
            objects_per_task: vec![4, 8, 16],
            growth_cap: vec![0.2, 0.6, 1.0],
            growth_floor: 0.2,
            wcet_range: [1, 50],
            task_utils: vec![0.25, 0.5, 2.0, 4.0, 8.0, 16.0],
            set_utils: vec![0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0, 28.0, 32.0, 36.0],
            core_counts: vec![4, 8, 12, 16, 20, 24, 28, 32],
            sets_per_point: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("{field}: {value} is out of range")]
    Range { field: &'static str, value: f64 },
}

impl GenConfig {
    /// The default grid with two graph iterations and 50 sets per point.
    pub fn desk() -> Self {
        GenConfig { graph_iters: 2, sets_per_point: 50, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let nonempty = [
            ("nodes_per_graph", self.nodes_per_graph.is_empty()),
            ("edge_prob", self.edge_prob.is_empty()),
            ("objects_per_task", self.objects_per_task.is_empty()),
            ("growth_cap", self.growth_cap.is_empty()),
            ("task_utils", self.task_utils.is_empty()),
            ("set_utils", self.set_utils.is_empty()),
            ("core_counts", self.core_counts.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, e)| *e) {
            return Err(ConfigError::Empty(name));
        }
        let check = |field: &'static str, value: f64, ok: bool| if ok { Ok(()) } else { Err(ConfigError::Range { field, value }) };
        for &n in &self.nodes_per_graph {
            check("nodes_per_graph", f64::from(n), n >= 2)?;
        }
        for &p in &self.edge_prob {
            check("edge_prob", p, (0.0..=1.0).contains(&p))?;
        }
        check("graph_iters", f64::from(self.graph_iters), self.graph_iters >= 1)?;
        for &o in &self.objects_per_task {
            check("objects_per_task", f64::from(o), o >= 1)?;
        }
        check("growth_floor", self.growth_floor, self.growth_floor > 0.0 && self.growth_floor <= 1.0)?;
        for &c in &self.growth_cap {
            check("growth_cap", c, c >= self.growth_floor && c <= 1.0)?;
        }
        let [lo, hi] = self.wcet_range;
        check("wcet_range", f64::from(lo), lo >= 1 && lo <= hi)?;
        for &u in self.task_utils.iter().chain(&self.set_utils) {
            check("utilization", u, u.is_finite() && u > 0.0)?;
        }
        for &c in &self.core_counts {
            check("core_counts", f64::from(c), c >= 1)?;
        }
        check("sets_per_point", f64::from(self.sets_per_point), self.sets_per_point >= 1)
    }

    pub fn graph_count(&self) -> usize {
        self.nodes_per_graph.len() * self.edge_prob.len() * self.graph_iters as usize
    }

    pub fn executed_count(&self) -> usize {
        self.graph_count() * self.objects_per_task.len() * self.growth_cap.len()
    }

    pub fn timed_count(&self) -> usize {
        self.executed_count() * self.task_utils.len()
    }

    pub fn set_count(&self) -> usize {
        self.set_utils.len() * self.core_counts.len() * self.sets_per_point as usize
    }
}

/// Precedence structure over nodes `1..=n`, before objects are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
}

/// Adds each edge `i → j`, `i < j`, independently with probability `p`.
pub fn gen_graph(n: u32, p: f64, rng: &mut ChaCha8Rng) -> Skeleton {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Skeleton { n, edges }
}

/// Creates `o` objects, binds every node to one of them uniformly, and adds
/// an empty source and sink where needed.
pub fn assign_execution(
    skeleton: &Skeleton,
    o: u32,
    cap: f64,
    floor: f64,
    wcet_range: [u32; 2],
    rng: &mut ChaCha8Rng,
) -> TaskGraph {
    let mut raw = RawGraph::default();
    for id in 1..=o {
        let c1 = f64::from(rng.gen_range(wcet_range[0]..=wcet_range[1]));
        let factor = if cap > floor { rng.gen_range(floor..=cap) } else { floor };
        raw.objects.push(ExecObject::new(id, WcetoFn::linear(c1, factor).expect("validated ranges")));
    }
    for id in 1..=skeleton.n {
        let object = ObjectId(rng.gen_range(1..=o));
        raw.nodes.push((NodeId(id), Node { object, threads: 1 }));
    }
    raw.edges = skeleton.edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect();
    TaskGraph::new(raw).expect("index-ordered edges are acyclic")
}

/// `T = D = C / U_τ`.
pub fn assign_timing(graph: TaskGraph, u_target: f64) -> Task {
    let period = crate::taskgraph::workload(&graph) / u_target;
    Task::new(period, graph).expect("positive workload and utilization")
}

/// `L > D`, or more cores than nodes.
pub fn trivially_infeasible(task: &Task) -> bool {
    match allocate_cores(task) {
        None => true,
        Some(m) => m as usize > task.graph.node_count(),
    }
}

/// Baseline tasks and their collapsed variants, aligned by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskPool {
    pub baseline: Vec<Task>,
    pub arbitrary: Vec<Task>,
    pub benefit: Vec<Task>,
    pub penalty: Vec<Task>,
}

impl TaskPool {
    pub fn len(&self) -> usize {
        self.baseline.len()
    }

    pub fn is_empty(&self) -> bool {
        self.baseline.is_empty()
    }

    pub fn collapsed(&self, order: CollapseOrder) -> &[Task] {
        match order {
            CollapseOrder::Arbitrary => &self.arbitrary,
            CollapseOrder::Benefit => &self.benefit,
            CollapseOrder::Penalty => &self.penalty,
        }
    }
}

/// Seed of the arbitrary ordering for the timed task at `index`.
pub fn ordering_seed(seed: u64, index: usize) -> u64 {
    sub_seed(seed, Stage::Ordering, index as u64)
}

/// Collapses every task under all three orderings and drops tasks that are
/// trivially infeasible with and without collapse.
pub fn filter_tasks(tasks: &[Task], seed: u64) -> TaskPool {
    let kept: Vec<Option<[Task; 4]>> = tasks
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let variants = CollapseOrder::ALL.map(|o| {
                let r = dagot_reduce(&t.graph, t.deadline, o, ordering_seed(seed, i));
                t.with_graph(r.graph)
            });
            let all_bad = trivially_infeasible(t) && variants.iter().all(trivially_infeasible);
            (!all_bad).then(|| {
                let [a, b, p] = variants;
                [t.clone(), a, b, p]
            })
        })
        .collect();
    let mut pool = TaskPool::default();
    for [t, a, b, p] in kept.into_iter().flatten() {
        pool.baseline.push(t);
        pool.arbitrary.push(a);
        pool.benefit.push(b);
        pool.penalty.push(p);
    }
    pool
}

/// Pool indices of one task set plus its grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    pub id: usize,
    pub target_u: f64,
    pub cores: u32,
    pub tasks: Vec<usize>,
}

impl SetSpec {
    pub fn materialize(&self, tasks: &[Task]) -> TaskSet {
        TaskSet { tasks: self.tasks.iter().map(|&i| tasks[i].clone()).collect(), cores: self.cores }
    }
}

/// Draws pool indices with replacement until the baseline utilization
/// first reaches `target`.
pub fn draw_set(pool_utils: &[f64], target: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    assert!(!pool_utils.is_empty(), "empty pool");
    let mut picked = Vec::new();
    let mut u = 0.0;
    while u < target {
        let i = rng.gen_range(0..pool_utils.len());
        picked.push(i);
        u += pool_utils[i];
    }
    picked
}

/// All `(U, c)` grid points, `n` sets each. Set ids follow grid order.
pub fn assemble(pool: &TaskPool, set_utils: &[f64], core_counts: &[u32], n: u32, seed: u64) -> Vec<SetSpec> {
    let utils: Vec<f64> = pool.baseline.iter().map(utilization).collect();
    let mut points = Vec::new();
    for &u in set_utils {
        for &c in core_counts {
            for k in 0..n {
                points.push((u, c, k));
            }
        }
    }
    points
        .par_iter()
        .enumerate()
        .map(|(id, &(u, c, _))| {
            let mut rng = stage_rng(seed, Stage::Assembly, id as u64);
            SetSpec { id, target_u: u, cores: c, tasks: draw_set(&utils, u, &mut rng) }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub graphs: usize,
    pub executed: usize,
    pub timed: usize,
    pub kept: usize,
    pub removed: usize,
    pub sets: usize,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub config: GenConfig,
    pub pool: TaskPool,
    pub sets: Vec<SetSpec>,
    pub counts: Counts,
}

/// Every timed task of the grid, in index order.
pub fn timed_tasks(cfg: &GenConfig) -> Vec<Task> {
    let mut graph_params = Vec::new();
    for &n in &cfg.nodes_per_graph {
        for &p in &cfg.edge_prob {
            for _ in 0..cfg.graph_iters {
                graph_params.push((n, p));
            }
        }
    }
    let skeletons: Vec<Skeleton> = graph_params
        .par_iter()
        .enumerate()
        .map(|(g, &(n, p))| gen_graph(n, p, &mut stage_rng(cfg.seed, Stage::Graph, g as u64)))
        .collect();

    let mut exec_params = Vec::new();
    for g in 0..skeletons.len() {
        for &o in &cfg.objects_per_task {
            for &cap in &cfg.growth_cap {
                exec_params.push((g, o, cap));
            }
        }
    }
    let executed: Vec<TaskGraph> = exec_params
        .par_iter()
        .enumerate()
        .map(|(e, &(g, o, cap))| {
            let mut rng = stage_rng(cfg.seed, Stage::Execution, e as u64);
            assign_execution(&skeletons[g], o, cap, cfg.growth_floor, cfg.wcet_range, &mut rng)
        })
        .collect();

    executed
        .iter()
        .flat_map(|g| cfg.task_utils.iter().map(move |&u| assign_timing(g.clone(), u)))
        .collect()
}

/// The full pipeline.
pub fn generate(cfg: &GenConfig) -> Result<Generated, ConfigError> {
    cfg.validate()?;
    let timed = timed_tasks(cfg);
    let pool = filter_tasks(&timed, cfg.seed);
    let sets = if pool.is_empty() {
        Vec::new()
    } else {
        assemble(&pool, &cfg.set_utils, &cfg.core_counts, cfg.sets_per_point, cfg.seed)
    };
    let counts = Counts {
        graphs: cfg.graph_count(),
        executed: cfg.executed_count(),
        timed: timed.len(),
        kept: pool.len(),
        removed: timed.len() - pool.len(),
        sets: sets.len(),
    };
    Ok(Generated { config: cfg.clone(), pool, sets, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::{critical_path_length, workload};
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn edge_probability_extremes() {
        let none = gen_graph(6, 0.0, &mut rng(1));
        assert!(none.edges.is_empty());
        let all = gen_graph(6, 1.0, &mut rng(1));
        assert_eq!(all.edges.len(), 15);
        assert!(all.edges.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn isolated_nodes_join_through_empty_nodes() {
        let sk = gen_graph(5, 0.0, &mut rng(1));
        let g = assign_execution(&sk, 2, 0.6, 0.2, [1, 50], &mut rng(2));
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.successors(g.source()).count(), 5);
        assert!(g.is_acyclic());
    }

    #[test]
    fn degenerate_growth_interval() {
        let sk = gen_graph(16, 0.1, &mut rng(3));
        let g = assign_execution(&sk, 4, 0.2, 0.2, [1, 50], &mut rng(4));
        for o in g.objects().filter(|o| !o.is_structural()) {
            let WcetoFn::LinearGrowth { c1, factor } = o.wceto else { panic!() };
            assert_eq!(factor, 0.2);
            assert!((1.0..=50.0).contains(&c1) && c1.fract() == 0.0);
        }
    }

    #[test]
    fn single_object_pairs_everything() {
        let sk = gen_graph(5, 0.3, &mut rng(5));
        let g = assign_execution(&sk, 1, 1.0, 0.2, [1, 50], &mut rng(6));
        assert_eq!(crate::collapse::candidates(&g).len(), 10);
    }

    #[test]
    fn timing_hits_target_utilization() {
        let sk = gen_graph(16, 0.1, &mut rng(7));
        let g = assign_execution(&sk, 4, 1.0, 0.2, [1, 50], &mut rng(8));
        for u in [0.25, 0.5, 2.0, 4.0, 8.0, 16.0] {
            let t = assign_timing(g.clone(), u);
            assert!((utilization(&t) - u).abs() <= 1e-9 * u);
            assert_eq!(t.period, t.deadline);
        }
    }

    #[test]
    fn default_grid_counts() {
        let cfg = GenConfig::default();
        assert_eq!(cfg.graph_count(), 90);
        assert_eq!(cfg.executed_count(), 810);
        assert_eq!(cfg.timed_count(), 4860);
        assert_eq!(cfg.set_count(), 96_000);
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::default().validate().is_ok());
        let bad = GenConfig { edge_prob: vec![1.5], ..GenConfig::default() };
        assert!(bad.validate().is_err());
        let bad = GenConfig { core_counts: vec![], ..GenConfig::default() };
        assert_eq!(bad.validate(), Err(ConfigError::Empty("core_counts")));
        let cfg: GenConfig = serde_json::from_str(r#"{"graph_iters": 2}"#).unwrap();
        assert_eq!(cfg.graph_iters, 2);
        assert_eq!(cfg.nodes_per_graph, vec![16, 32, 64]);
        assert!(serde_json::from_str::<GenConfig>(r#"{"graph_iter": 2}"#).is_err());
    }

    #[test]
    fn filtration_keeps_feasible_baselines() {
        let sk = gen_graph(16, 0.12, &mut rng(9));
        let g = assign_execution(&sk, 4, 0.6, 0.2, [1, 50], &mut rng(10));
        let tasks: Vec<Task> = [0.25, 0.5, 1000.0].iter().map(|&u| assign_timing(g.clone(), u)).collect();
        let pool = filter_tasks(&tasks, 1);
        assert!(pool.len() >= 2);
        assert_eq!(pool.baseline[0], tasks[0]);
        // Utilization 1000 puts the deadline far below any critical path.
        assert!(trivially_infeasible(&tasks[2]));
        assert_eq!(pool.len(), 2);
    }

    #[test]
    fn assembly_stops_at_first_reach() {
        let utils = [0.6, 0.7, 0.8];
        let mut r = rng(11);
        for target in [0.5, 2.0, 5.0] {
            let picked = draw_set(&utils, target, &mut r);
            let total: f64 = picked.iter().map(|&i| utils[i]).sum();
            let before: f64 = picked[..picked.len() - 1].iter().map(|&i| utils[i]).sum();
            assert!(total >= target && before < target);
        }
        assert_eq!(draw_set(&utils, 0.5, &mut r).len(), 1);
    }

    #[test]
    fn small_pipeline_is_deterministic_and_aligned() {
        let cfg = GenConfig {
            nodes_per_graph: vec![8, 16],
            edge_prob: vec![0.12],
            graph_iters: 1,
            objects_per_task: vec![4],
            growth_cap: vec![0.6],
            set_utils: vec![1.0, 4.0],
            core_counts: vec![4, 8],
            sets_per_point: 3,
            seed: 42,
            ..GenConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.pool, b.pool);
        assert_eq!(a.sets, b.sets);
        assert_eq!(a.counts.timed, 12);
        assert_eq!(a.counts.sets, 12);
        for i in 0..a.pool.len() {
            let base = &a.pool.baseline[i];
            for o in CollapseOrder::ALL {
                let t = &a.pool.collapsed(o)[i];
                assert_eq!((t.period, t.deadline), (base.period, base.deadline));
                assert_eq!(t.graph.threads_per_object(), base.graph.threads_per_object());
                assert!(workload(&t.graph) <= workload(&base.graph));
                if critical_path_length(&base.graph).unwrap() <= base.deadline {
                    assert!(critical_path_length(&t.graph).unwrap() <= t.deadline);
                }
            }
        }
        let other = generate(&GenConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(other.sets, a.sets);
    }
}
