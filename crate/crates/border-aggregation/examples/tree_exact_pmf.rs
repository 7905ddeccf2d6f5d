//! Exact distribution of xi on the binary tree via the coin-race recursion.
//!
//! Run: cargo run --release --example tree_exact_pmf

use border_aggregation::tree::{tree_upper_bound, xi_tree_exact};

fn main() {
    for k in [4u32, 5] {
        let pmf = xi_tree_exact(k).expect("exact pmf");
        println!("xi_{k}:");
        for (value, mass) in pmf.iter() {
            println!("  P(xi = {value:>2}) = {mass}");
        }
        println!();
    }

    println!("{:>3} {:>12} {:>10}", "K", "E[xi_K]", "bound");
    for k in 3..=10u32 {
        let mean = xi_tree_exact(k).expect("exact pmf").mean();
        let bound = tree_upper_bound(2, k).expect("bound");
        println!("{k:>3} {mean:>12.4} {bound:>10}");
    }
}
