//! The synthetic generation pipeline stage by stage on a reduced grid.
//!
//! ```bash
//! cargo run --example generate_pipeline
//! ```

use dagot::generator::{generate, GenConfig};
use dagot::taskgraph::utilization;

fn main() {
    let full = GenConfig::default();
    println!(
        "full grid: {} graphs, {} executed, {} timed tasks, {} sets",
        full.graph_count(),
        full.executed_count(),
        full.timed_count(),
        full.set_count()
    );

    let cfg = GenConfig {
        graph_iters: 1,
        set_utils: vec![2.0, 8.0, 16.0],
        core_counts: vec![8, 16],
        sets_per_point: 3,
        seed: 7,
        ..GenConfig::default()
    };
    let g = generate(&cfg).unwrap();
    println!("reduced grid counts: {}", serde_json::to_string(&g.counts).unwrap());
    for s in g.sets.iter().take(6) {
        let u: f64 = s.tasks.iter().map(|&i| utilization(&g.pool.baseline[i])).sum();
        println!("set {:>2}: target U {:>4} cores {:>2} tasks {:?} actual U {:.2}", s.id, s.target_u, s.cores, s.tasks, u);
    }
}
