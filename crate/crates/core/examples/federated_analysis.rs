//! Federated analysis of a small task set under every approach.
//!
//! ```bash
//! cargo run --example federated_analysis
//! ```

use std::path::Path;
use std::time::Duration;

use dagot::federated::{analyze_all, TaskSet};
use dagot::generator::assign_timing;
use dagot::io::read_task;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let occlusion = read_task(&dir.join("occlusion.json")).unwrap();
    let dag = read_task(&dir.join("dag_task.json")).unwrap();
    let light = assign_timing(read_task(&dir.join("node_collapse.json")).unwrap().graph, 0.4);
    let set = TaskSet { tasks: vec![occlusion, dag, light], cores: 4 };
    println!("set utilization {:.3} on {} cores", set.utilization(), set.cores);
    for v in analyze_all(&set, 0, Some(Duration::from_secs(5))) {
        println!("{}", serde_json::to_string(&v).unwrap());
    }
}
