//! Workload, critical path and core allocation of the bundled example tasks,
//! before and after single collapses.
//!
//! ```bash
//! cargo run --example worked_examples
//! ```

use std::path::Path;

use dagot::collapse::{collapse, real_core_allocation};
use dagot::federated::allocate_cores_for;
use dagot::io::read_task;
use dagot::taskgraph::{critical_path, workload, NodeId, Task, TaskGraph};

fn load(name: &str) -> Task {
    read_task(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).expect("bundled fixture")
}

fn describe(label: &str, g: &TaskGraph, d: f64) {
    let (path, l) = critical_path(g).expect("acyclic");
    let c = workload(g);
    let path: Vec<String> = path.iter().map(NodeId::to_string).collect();
    println!(
        "{label:<28} C={c:<5} L={l:<5} m={:<7.4} ⌈m⌉={:?}  path {}",
        real_core_allocation(c, l, d),
        allocate_cores_for(c, l, d),
        path.join("→")
    );
}

fn main() {
    let t = load("dag_task.json");
    describe("dag_task", &t.graph, t.deadline);

    for (file, a, b) in [("node_collapse.json", 2, 3), ("path_reduction.json", 2, 3), ("path_extension.json", 2, 3)] {
        let t = load(file);
        describe(file, &t.graph, t.deadline);
        let h = collapse(&t.graph, NodeId(a), NodeId(b)).expect("candidate pair");
        describe(&format!("  after {a}⋈{b}"), &h, t.deadline);
    }

    let t = load("occlusion.json");
    describe("occlusion (D=40)", &t.graph, t.deadline);
    let uv = collapse(&t.graph, NodeId(8), NodeId(9)).unwrap();
    let xy = collapse(&t.graph, NodeId(3), NodeId(4)).unwrap();
    describe("  after u⋈v", &uv, t.deadline);
    describe("  after x⋈y", &xy, t.deadline);
    let both = collapse(&xy, NodeId(8), NodeId(9)).unwrap();
    println!("  u⋈v after x⋈y is acyclic: {}", both.is_acyclic());
    if both.is_acyclic() {
        describe("  after both", &both, t.deadline);
    }

    let t = load("cyclic_occlusion.json");
    let first = collapse(&t.graph, NodeId(2), NodeId(6)).unwrap();
    let second = collapse(&first, NodeId(3), NodeId(5)).unwrap();
    println!("cyclic_occlusion: second collapse acyclic: {}", second.is_acyclic());
}
