use crate::wceto::Cycles;

/// A serialized low-utilization task as seen by the partitioner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeqLoad {
    pub wcet: Cycles,
    pub period: Cycles,
}

impl SeqLoad {
    pub fn utilization(&self) -> f64 {
        self.wcet / self.period
    }
}

/// Worst-Fit: tasks in decreasing utilization, each onto the admissible core
/// with the lowest current utilization. Returns task indices per core, or
/// `None` when some task fits nowhere.
pub fn worst_fit_partition(
    low: &[SeqLoad],
    m_low: usize,
    test: impl Fn(&[SeqLoad]) -> bool,
) -> Option<Vec<Vec<usize>>> {
    let mut order: Vec<usize> = (0..low.len()).collect();
    order.sort_by(|&a, &b| low[b].utilization().total_cmp(&low[a].utilization()).then(a.cmp(&b)));
    let mut cores: Vec<Vec<usize>> = vec![Vec::new(); m_low];
    let mut util = vec![0.0f64; m_low];
    for i in order {
        let mut by_util: Vec<usize> = (0..m_low).collect();
        by_util.sort_by(|&a, &b| util[a].total_cmp(&util[b]).then(a.cmp(&b)));
        let chosen = by_util.into_iter().find(|&k| {
            let mut trial: Vec<SeqLoad> = cores[k].iter().map(|&j| low[j]).collect();
            trial.push(low[i]);
            test(&trial)
        })?;
        cores[chosen].push(i);
        util[chosen] += low[i].utilization();
    }
    Some(cores)
}
