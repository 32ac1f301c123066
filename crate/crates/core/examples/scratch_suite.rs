use dgf4_core::checks;
use dgf4_core::donaldson_metric::SolverOptions;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let items = checks::run_full_suite(8, 42, &SolverOptions::default()).unwrap();
    let dt = t0.elapsed();
    let mut fails = 0;
    for item in &items {
        let status = if item.pass() { "PASS" } else { "FAIL" };
        if !item.pass() {
            fails += 1;
        }
        println!("{status} {:<58} {:>12.3e} (tol {:>8.1e})", item.name, item.residual, item.tolerance);
    }
    println!("total: {} items, {} failures, {:.1?}", items.len(), fails, dt);
}
