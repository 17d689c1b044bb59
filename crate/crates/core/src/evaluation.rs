//! Schedulability evaluation of assembled task sets across approaches.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::federated::{analyze_prepared, class_of, Approach, Class, PreparedTask, Verdict};
use crate::generator::{SetSpec, TaskPool};
use crate::metrics::SetRecord;
use crate::taskgraph::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub approaches: Vec<Approach>,
    /// Wall-clock budget per set for the collapse-based approaches.
    pub timeout: Option<Duration>,
    /// Fill `elapsed_ms`. Off by default because timings are not reproducible.
    pub timing: bool,
    /// Replaces each set's core count.
    pub cores: Option<u32>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            approaches: Approach::ALL.to_vec(),
            timeout: Some(crate::federated::DEFAULT_TIMEOUT),
            timing: false,
            cores: None,
        }
    }
}

fn tasks_for(pool: &TaskPool, approach: Approach) -> &[Task] {
    match approach.ordering() {
        None => &pool.baseline,
        Some(order) => pool.collapsed(order),
    }
}

/// Result rows for one set, one per requested approach.
pub fn evaluate_set(pool: &TaskPool, spec: &SetSpec, opts: &EvalOptions) -> Vec<SetRecord> {
    let cores = opts.cores.unwrap_or(spec.cores);
    let start = Instant::now();
    let base: Vec<PreparedTask> = spec
        .tasks
        .iter()
        .enumerate()
        .map(|(k, &i)| PreparedTask::new(k, class_of(&pool.baseline[i]), &pool.baseline[i]))
        .collect();

    let mut rows: Vec<(Verdict, Vec<PreparedTask>, Option<f64>)> = Vec::new();
    for &approach in &opts.approaches {
        let t0 = Instant::now();
        let source = tasks_for(pool, approach);
        let prepared: Vec<PreparedTask> = spec
            .tasks
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let mut p = PreparedTask::new(k, base[k].class, &source[i]);
                p.collapsed_pairs = pool.baseline[i].graph.node_count() - source[i].graph.node_count();
                p
            })
            .collect();
        let verdict = analyze_prepared(&prepared, cores, approach);
        let elapsed = opts.timing.then(|| t0.elapsed().as_secs_f64() * 1e3);
        rows.push((verdict, prepared, elapsed));
    }
    if opts.timeout.is_some_and(|t| start.elapsed() > t) {
        for (v, _, _) in rows.iter_mut().filter(|(v, _, _)| v.approach.ordering().is_some()) {
            *v = Verdict::timeout(v.approach, cores);
        }
    }

    let base_m: Vec<Option<u32>> = base.iter().map(PreparedTask::cores).collect();
    rows.into_iter()
        .map(|(v, prepared, elapsed_ms)| {
            let mut r = SetRecord {
                set_id: spec.id,
                cores,
                target_u: spec.target_u,
                approach: v.approach,
                schedulable: v.schedulable,
                reason: v.reason,
                m_high: v.m_high,
                delta_m: 0,
                delta_c: 0.0,
                delta_l: 0.0,
                elapsed_ms,
                base_m_compared: 0,
                base_c: 0.0,
                base_c_high: 0.0,
                delta_c_high: 0.0,
            };
            for (k, p) in prepared.iter().enumerate() {
                let b = &base[k];
                let dc = b.shape.workload - p.shape.workload;
                r.delta_c += dc;
                r.delta_l += p.shape.critical_path - b.shape.critical_path;
                r.base_c += b.shape.workload;
                if b.class == Class::High {
                    r.base_c_high += b.shape.workload;
                    r.delta_c_high += dc;
                    if let (Some(mb), Some(mp)) = (base_m[k], p.cores()) {
                        r.delta_m += i64::from(mb) - i64::from(mp);
                        r.base_m_compared += mb;
                    }
                }
            }
            r
        })
        .collect()
}

/// All sets, evaluated in parallel and returned in (set, approach) order.
pub fn evaluate(pool: &TaskPool, sets: &[SetSpec], opts: &EvalOptions) -> Vec<SetRecord> {
    sets.par_iter().flat_map_iter(|s| evaluate_set(pool, s, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::{dagot_reduce, CollapseOrder};
    use crate::collapse::tests::occlusion_graph;
    use crate::federated::Reason;

    fn pool() -> TaskPool {
        let t = Task::new(40.0, occlusion_graph()).unwrap();
        let mut p = TaskPool::default();
        p.baseline.push(t.clone());
        for o in CollapseOrder::ALL {
            let r = dagot_reduce(&t.graph, t.deadline, o, 1);
            let v = t.with_graph(r.graph);
            match o {
                CollapseOrder::Arbitrary => p.arbitrary.push(v),
                CollapseOrder::Benefit => p.benefit.push(v),
                CollapseOrder::Penalty => p.penalty.push(v),
            }
        }
        p
    }

    #[test]
    fn one_set_all_approaches() {
        let spec = SetSpec { id: 7, target_u: 1.0, cores: 2, tasks: vec![0] };
        let rows = evaluate_set(&pool(), &spec, &EvalOptions::default());
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].reason, Reason::InsufficientCores);
        assert_eq!(rows[0].m_high, 3);
        let l = rows.iter().find(|r| r.approach == Approach::Least).unwrap();
        assert!(l.schedulable);
        assert_eq!((l.delta_m, l.base_m_compared, l.delta_c, l.delta_l), (1, 3, 3.0, -3.0));
        assert!(rows.iter().all(|r| r.elapsed_ms.is_none()));
    }

    #[test]
    fn cores_override_and_zero_timeout() {
        let spec = SetSpec { id: 0, target_u: 1.0, cores: 2, tasks: vec![0, 0] };
        let opts = EvalOptions { cores: Some(6), timeout: Some(Duration::ZERO), timing: true, ..Default::default() };
        let rows = evaluate_set(&pool(), &spec, &opts);
        assert!(rows[0].schedulable && rows[0].cores == 6);
        assert!(rows[2..].iter().all(|r| r.reason == Reason::Timeout));
        assert!(rows.iter().all(|r| r.elapsed_ms.is_some()));
    }
}
