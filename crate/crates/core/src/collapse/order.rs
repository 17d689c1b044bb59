use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CandidatePair;
use crate::taskgraph::{critical_path_length, DenseView, TaskGraph};

/// Descending workload saving; ties by (a, b).
pub fn order_greatest_benefit(mut pairs: Vec<CandidatePair>) -> Vec<CandidatePair> {
    pairs.sort_by(|x, y| y.delta.total_cmp(&x.delta).then((x.a, x.b).cmp(&(y.a, y.b))));
    pairs
}

/// Ascending critical-path extension, each measured against `graph` as given.
///
/// Pairs whose collapse is cyclic or cannot be evaluated get `+∞`.
pub fn order_least_penalty(mut pairs: Vec<CandidatePair>, graph: &TaskGraph) -> Vec<CandidatePair> {
    let l = critical_path_length(graph).expect("acyclic graph");
    let view = DenseView::new(graph);
    for p in &mut pairs {
        let (u, v) = (p.a.min(p.b), p.a.max(p.b));
        let t = view.trial(view.index_of(u), view.index_of(v));
        p.penalty = Some(t.map_or(f64::INFINITY, |t| t.critical_path - l));
    }
    pairs.sort_by(|x, y| {
        let (px, py) = (x.penalty.unwrap(), y.penalty.unwrap());
        px.total_cmp(&py).then((x.a, x.b).cmp(&(y.a, y.b)))
    });
    pairs
}

/// Seeded uniform shuffle of the pairs in (a, b) order.
pub fn order_arbitrary(mut pairs: Vec<CandidatePair>, seed: u64) -> Vec<CandidatePair> {
    pairs.sort_by_key(|p| (p.a, p.b));
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pairs
}
