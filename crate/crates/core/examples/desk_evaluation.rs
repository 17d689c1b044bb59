//! Scaled synthetic evaluation: two graph iterations and 50 sets per grid
//! point, analyzed under every approach and summarized per utilization bucket.
//!
//! ```bash
//! cargo run --release --example desk_evaluation [seed]
//! ```

use std::time::Instant;

use dagot::evaluation::{evaluate, EvalOptions};
use dagot::federated::Approach;
use dagot::generator::{generate, GenConfig};
use dagot::metrics::aggregate;

fn main() {
    let mut cfg = GenConfig::desk();
    if let Some(seed) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        cfg.seed = seed;
    }
    let t0 = Instant::now();
    let generated = generate(&cfg).expect("desk config is valid");
    let c = generated.counts;
    println!(
        "generated {} timed tasks, kept {}, {} sets in {:.1}s",
        c.timed,
        c.kept,
        c.sets,
        t0.elapsed().as_secs_f64()
    );

    let t1 = Instant::now();
    let records = evaluate(&generated.pool, &generated.sets, &EvalOptions::default());
    println!("analyzed {} rows in {:.1}s\n", records.len(), t1.elapsed().as_secs_f64());

    println!("{:>9} {:>5} {:>6} {:>7} {:>8} {:>8}", "bucket", "appr", "n", "sched", "cores", "dm");
    for s in aggregate(&records, 4.0) {
        println!(
            "[{:>2},{:>3}) {:>5} {:>6} {:>7.3} {:>8.2} {:>8.3}",
            s.bucket_lo, s.bucket_hi, s.approach.as_str(), s.n, s.sched_ratio, s.mean_cores, s.mean_delta_m
        );
    }

    println!("\noverall");
    for s in aggregate(&records, f64::INFINITY) {
        let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
        if s.approach.ordering().is_some() || s.approach == Approach::BaselineNp {
            println!(
                "{:>5} sched {:.3} core savings {} workload reduction {} (high {})",
                s.approach.as_str(),
                s.sched_ratio,
                pct(s.core_savings),
                pct(s.workload_reduction),
                pct(s.workload_reduction_high)
            );
        }
    }
}
