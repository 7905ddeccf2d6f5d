//! The three star engines against the exact survivor distribution.
//!
//! The star graph with K arms of interior length N reduces to an urn race
//! (pick an arm with probability inversely proportional to its remaining
//! length) and, through the death-process coupling, to K independent pure
//! death processes. All three engines must produce the same law of the
//! survivor count S; the exact distribution comes from rational dynamic
//! programming over urn states.
//!
//! Run: cargo run --release --example star_engines

use std::collections::BTreeMap;

use border_aggregation::experiment::{par_replicas, star_replica, StarEngine};
use border_aggregation::star::{exact_star_pmf, xi_pmf_from_survivors};
use num_traits::ToPrimitive;

fn main() {
    let (n, k) = (2u32, 3u32);
    let reps = 30_000u64;
    let seed = 7u64;

    let exact = exact_star_pmf(n, k).expect("exact pmf");
    println!("star N={n} K={k}: survivor distribution, {reps} replicas per engine\n");
    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10}",
        "S", "exact", "walk", "urn", "death"
    );

    let mut freqs: Vec<BTreeMap<i64, f64>> = Vec::new();
    for engine in [StarEngine::Walk, StarEngine::Urn, StarEngine::Death] {
        let survivors = par_replicas(reps, seed, |r, _| {
            star_replica(engine, n, k, seed, r).expect("replica").survivors as i64
        });
        let mut hist: BTreeMap<i64, f64> = BTreeMap::new();
        for s in survivors {
            *hist.entry(s).or_insert(0.0) += 1.0 / reps as f64;
        }
        freqs.push(hist);
    }

    for (s, mass) in exact.iter() {
        let want = mass.to_f64().expect("mass fits in f64");
        println!(
            "{:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            s,
            want,
            freqs[0].get(&s).unwrap_or(&0.0),
            freqs[1].get(&s).unwrap_or(&0.0),
            freqs[2].get(&s).unwrap_or(&0.0),
        );
    }

    let xi = xi_pmf_from_survivors(&exact, n, k);
    println!("\nxi = N*K - S + 1; exact xi law:");
    for (v, mass) in xi.iter() {
        println!("  P(xi = {v}) = {mass}");
    }
}
