//! Worst-Fit partitioning of sequential tasks under the non-preemptive and
//! preemptive uniprocessor EDF tests.
//!
//! ```bash
//! cargo run --example edf_partitioning
//! ```

use dagot::federated::{edf_np_test, edf_p_test, simulate_np_edf, worst_fit_partition, IntTask, SeqLoad};

fn np(core: &[SeqLoad]) -> bool {
    let tasks: Vec<IntTask> = core.iter().map(|t| IntTask::pessimistic(t.wcet, t.period)).collect();
    edf_np_test(&tasks)
}

fn p(core: &[SeqLoad]) -> bool {
    edf_p_test(&core.iter().map(|t| (t.wcet, t.period)).collect::<Vec<_>>())
}

fn main() {
    let blocked = [IntTask { wcet: 2, period: 4 }, IntTask { wcet: 4, period: 12 }];
    println!(
        "{blocked:?}: NP test {} synchronous simulation {}",
        edf_np_test(&blocked),
        simulate_np_edf(&blocked)
    );

    let low = [(2.0, 4.0), (4.0, 12.0), (3.0, 10.0), (5.0, 20.0), (1.5, 6.0)].map(|(wcet, period)| SeqLoad { wcet, period });
    for cores in 1..=3 {
        println!(
            "{cores} core(s): NP {:?}  P {:?}",
            worst_fit_partition(&low, cores, np),
            worst_fit_partition(&low, cores, p)
        );
    }
}
