//! Growth factors: fitting a linear bound to a measured WCETO table and
//! reading the bundled benchmark table.
//!
//! ```bash
//! cargo run --example growth_factors
//! ```

use std::fs::File;
use std::path::Path;

use dagot::wceto::{check_concave, fit_growth_factor, read_growth_factors, WcetoFn};

fn main() {
    let measured = [10.0, 15.0, 17.0, 18.0, 19.0];
    let f = fit_growth_factor(&measured).expect("at least one value");
    println!("table {measured:?} concave={} fitted factor {f}", check_concave(&measured));
    let bound = WcetoFn::linear(measured[0], f).unwrap();
    for (eta, v) in (1..).zip(measured) {
        println!("  η={eta} measured {v:>4} bound {:>4}", bound.eval(eta).unwrap());
    }

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/taclebench_growth_factors.csv");
    let records = read_growth_factors(File::open(path).expect("bundled fixture")).expect("valid CSV");
    let (ok, skip): (Vec<_>, Vec<_>) = records.iter().partition(|r| r.collapsible());
    println!("\n{} benchmarks, {} collapsible (factor ≤ 1), {} never collapsed", records.len(), ok.len(), skip.len());
    for r in &skip {
        println!("  {:<16} {:.3}", r.name, r.growth_factor);
    }
    let example = &ok[0];
    let w = example.wceto(10.0).unwrap();
    println!("\n{} with c1=10: c(1..4) = {:?}", example.name, (1..=4).map(|e| w.eval(e).unwrap()).collect::<Vec<_>>());
}
