//! d-ary tree simulation: empirical xi against the exact binary-tree law,
//! level bookkeeping, and the log-gap window K - log_d xi.
//!
//! Run: cargo run --release --example tree_simulation

use std::collections::BTreeMap;

use border_aggregation::analysis::tv_distance;
use border_aggregation::experiment::par_replicas;
use border_aggregation::tree::{simulate_tree_with, tree_upper_bound, xi_tree_exact};

fn main() {
    // Binary tree: TV distance to the exact law.
    let (d, k) = (2u32, 6u32);
    let reps = 100_000u64;
    let xis = par_replicas(reps, 3, |_, rng| {
        simulate_tree_with(d, k, rng).expect("run").0.xi as i64
    });
    let mut hist: BTreeMap<i64, f64> = BTreeMap::new();
    for xi in &xis {
        *hist.entry(*xi).or_insert(0.0) += 1.0 / reps as f64;
    }
    let exact = xi_tree_exact(k).expect("pmf").to_f64_map();
    println!(
        "d=2, K={k}: TV(empirical, exact) = {:.5} at {reps} replicas",
        tv_distance(&hist, &exact)
    );
    println!(
        "mean xi = {:.3} (exact {:.3}), bound {}",
        xis.iter().sum::<i64>() as f64 / reps as f64,
        xi_tree_exact(k).expect("pmf").mean(),
        tree_upper_bound(d, k).expect("bound")
    );

    // Ternary tree: simulation is the only route (the exact recursion for
    // d >= 3 is not implemented).
    let (d, k) = (3u32, 6u32);
    let reps = 20_000u64;
    let xis = par_replicas(reps, 4, |_, rng| {
        simulate_tree_with(d, k, rng).expect("run").0.xi as i64
    });
    println!(
        "\nd=3, K={k}: mean xi = {:.2}, bound {}",
        xis.iter().sum::<i64>() as f64 / reps as f64,
        tree_upper_bound(d, k).expect("bound")
    );

    // Depth window of K - log2(xi), d = 2.
    println!("\nfraction of runs with 1 <= K - log2(xi) <= 2 sqrt(K) + 1:");
    for k in [9u32, 11, 13] {
        let runs = 400u64;
        let ok = par_replicas(runs, 5, |_, rng| {
            let xi = simulate_tree_with(2, k, rng).expect("run").0.xi as f64;
            let gap = k as f64 - xi.log2();
            (gap >= 1.0 - 1e-12 && gap <= 2.0 * (k as f64).sqrt() + 1.0) as u64
        })
        .into_iter()
        .sum::<u64>();
        println!("  K={k:>2}: {:.3}", ok as f64 / runs as f64);
    }
}
