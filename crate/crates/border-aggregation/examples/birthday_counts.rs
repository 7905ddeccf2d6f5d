//! Generalized birthday counts: the number of uniform trials over A
//! outcomes until one outcome repeats m times. For m = 2 the tail has the
//! classical product form; for the tree this count stochastically lower
//! bounds the first stick at level K - m.
//!
//! Run: cargo run --release --example birthday_counts

use border_aggregation::experiment::par_replicas;
use border_aggregation::tree::{birthday_tail, simulate_tree_with, simulate_zeta_km_with};

fn main() {
    // Classical birthday numbers.
    println!("P(zeta > t) over A = 365 outcomes (m = 2):");
    for t in [10u64, 23, 41, 60] {
        println!("  t={t:>2}: {:.4}", birthday_tail(365, t).expect("tail"));
    }

    // Empirical tail vs closed form for a tree-sized A.
    let a = 256u64;
    let reps = 50_000u64;
    let counts = par_replicas(reps, 11, |_, rng| {
        simulate_zeta_km_with(a, 2, rng).expect("zeta")
    });
    println!("\nA = {a}, m = 2, {reps} replicas:");
    for t in [8u64, 16, 24, 32] {
        let emp = counts.iter().filter(|&&z| z > t).count() as f64 / reps as f64;
        let exact = birthday_tail(a, t).expect("tail");
        println!("  P(zeta > {t:>2}) empirical {emp:.4} closed form {exact:.4}");
    }

    // Stochastic domination: first stick at level K-2 vs zeta_{K,2}.
    let k = 10u32;
    let reps = 3_000u64;
    let eta: Vec<u64> = par_replicas(reps, 12, |_, rng| {
        simulate_tree_with(2, k, rng).expect("run").1.first_stick[(k - 2) as usize]
    });
    let zeta: Vec<u64> = par_replicas(reps, 13, |_, rng| {
        simulate_zeta_km_with(2u64.pow(k - 2), 2, rng).expect("zeta")
    });
    let mean = |v: &[u64]| v.iter().sum::<u64>() as f64 / v.len() as f64;
    println!(
        "\nd=2, K={k}: mean first stick at level K-2 = {:.2}, mean zeta_{{K,2}} = {:.2}",
        mean(&eta),
        mean(&zeta)
    );
    println!("(the level-stick index dominates the birthday count)");
}
