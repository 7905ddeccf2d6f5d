//! Survivor scaling S_N(K) ~ N^(3/4) via the death-coupling engine.
//!
//! Run: cargo run --release --example star_survivor_scaling

use border_aggregation::experiment::{fit_sweep, star_survivor_sweep};

fn main() {
    let n_list = [250u32, 500, 1000, 2000, 4000];
    let reps = 5_000u64;
    for k in [2u32, 3, 4] {
        let points = star_survivor_sweep(k, &n_list, reps, 40 + k as u64).expect("sweep");
        println!("K = {k} ({reps} replicas per point)");
        println!("{:>6} {:>12} {:>14}", "N", "E[S_N(K)]", "E[S]/N^0.75");
        for p in &points {
            println!(
                "{:>6} {:>12.3} {:>14.4}",
                p.n,
                p.mean,
                p.mean / (p.n as f64).powf(0.75)
            );
        }
        let fit = fit_sweep(&points).expect("fit");
        println!("fitted exponent: {:.4} (expect ~0.75)\n", fit.alpha);
    }
}
