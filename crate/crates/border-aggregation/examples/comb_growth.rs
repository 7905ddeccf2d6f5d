//! Comb-lattice aggregation: the embedded axis walk against the literal
//! engine, frontier snapshots, and the N^(3/2) growth of xi.
//!
//! Run: cargo run --release --example comb_growth

use std::collections::BTreeMap;

use border_aggregation::analysis::tv_distance;
use border_aggregation::comb::{simulate_comb, CombEngine};
use border_aggregation::experiment::{comb_xi_sweep, fit_sweep};

fn main() {
    // Cross-engine distribution check at a small height.
    let n = 4u32;
    let reps = 20_000u64;
    let mut lit: BTreeMap<i64, f64> = BTreeMap::new();
    let mut emb: BTreeMap<i64, f64> = BTreeMap::new();
    for seed in 0..reps {
        let (a, _) = simulate_comb(n, seed, CombEngine::Literal).expect("literal");
        let (b, _) = simulate_comb(n, seed, CombEngine::Embedded).expect("embedded");
        *lit.entry(a.xi as i64).or_insert(0.0) += 1.0 / reps as f64;
        *emb.entry(b.xi as i64).or_insert(0.0) += 1.0 / reps as f64;
    }
    println!(
        "N={n}: TV(literal, embedded) = {:.4} at {reps} replicas",
        tv_distance(&lit, &emb)
    );

    // Frontier state of one run.
    let (out, state) = simulate_comb(8, 5, CombEngine::Embedded).expect("run");
    println!("\nN=8 run: xi = {}, columns touched = {}", out.xi, state.frontiers.len());
    println!("frontier snapshot (j, h+, h-):");
    for line in state.frontier_csv().lines().take(8) {
        println!("  {line}");
    }

    // Growth exponent.
    let points = comb_xi_sweep(CombEngine::Embedded, &[8, 16, 32, 64], 400, 17).expect("sweep");
    println!("\nmean xi per N (400 replicas):");
    for p in &points {
        println!("  N={:>3}: {:>9.1}  (xi / N^1.5 = {:.3})", p.n, p.mean, p.mean / (p.n as f64).powf(1.5));
    }
    let fit = fit_sweep(&points).expect("fit");
    println!("fitted exponent {:.3} (growth is Theta(N^1.5))", fit.alpha);
}
