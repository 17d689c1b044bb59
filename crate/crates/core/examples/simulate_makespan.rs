//! Makespan of a generated task on its dedicated cores, under both
//! tie-break policies and with early completion.
//!
//! ```bash
//! cargo run --example simulate_makespan
//! ```

use dagot::federated::allocate_cores;
use dagot::generator::{assign_execution, assign_timing, gen_graph};
use dagot::rng::{stage_rng, Stage};
use dagot::simulator::{simulate, simulate_with, summarize, write_trace_csv, SimOptions, TieBreak};

fn main() {
    let mut rng = stage_rng(11, Stage::Graph, 0);
    let sk = gen_graph(64, 0.06, &mut rng);
    let task = assign_timing(assign_execution(&sk, 8, 0.6, 0.2, [1, 50], &mut rng), 2.0);
    let m = allocate_cores(&task).expect("feasible task") as usize;
    println!("C={} L={} D={:.2} m={m}", task.workload(), task.critical_path_length(), task.deadline);

    for tb in [TieBreak::LongestPath, TieBreak::Random(1), TieBreak::Random(2)] {
        let s = summarize(&simulate(&task.graph, m, tb), &task.graph, m, task.deadline);
        println!("{tb:?}: {}", serde_json::to_string(&s).unwrap());
    }
    let early = simulate_with(&task.graph, m, SimOptions { tie_break: TieBreak::LongestPath, early_completion: Some((0.5, 3)) });
    println!("early completion: makespan {:.2}", early.makespan);

    let mut csv = Vec::new();
    write_trace_csv(&simulate(&task.graph, m, TieBreak::LongestPath), &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    println!("\ntrace head:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }
}
