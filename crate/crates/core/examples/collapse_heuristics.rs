//! The three collapse orders on the occlusion task, plus the exhaustive
//! oracle for comparison.
//!
//! ```bash
//! cargo run --example collapse_heuristics
//! ```

use std::path::Path;

use dagot::collapse::{candidates, dagot_reduce, optimal_collapse_oracle, CollapseOrder, DEFAULT_ORACLE_LIMIT};
use dagot::io::read_task;

fn main() {
    let t = read_task(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/occlusion.json")).unwrap();
    for p in candidates(&t.graph) {
        println!("candidate {}⋈{} saves {}", p.a, p.b, p.delta);
    }
    for order in CollapseOrder::ALL {
        let r = dagot_reduce(&t.graph, t.deadline, order, 0);
        let plan: Vec<String> = r.plan.iter().map(|p| format!("{}⋈{}", p.a, p.b)).collect();
        println!(
            "{order:<9} plan [{}] accepted {:?}: C {}→{} L {}→{} m {:.3}→{:.3}",
            plan.join(", "),
            r.accepted,
            r.before.workload,
            r.after.workload,
            r.before.critical_path,
            r.after.critical_path,
            r.before.cores,
            r.after.cores
        );
    }
    let best = optimal_collapse_oracle(&t.graph, t.deadline, DEFAULT_ORACLE_LIMIT).unwrap();
    println!("oracle    m {:.3} with merges {:?}", best.cores, best.merges.history());
}
