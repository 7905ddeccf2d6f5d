//! First-hit distribution H(x, y) of a simple random walk on small targets.
//!
//! The estimator runs exact walks (closed-form diffusive jumps, literal
//! steps near the target) and restarts walks that leave a 100 |x|
//! enclosure. For a segment of radius r hit from far away, the maximum of
//! H scales like 1/sqrt(r).
//!
//! Run: cargo run --release --example hitting_measure

use border_aggregation::lattice::{estimate_hitting_measure, segment_target};

fn main() {
    // Symmetry check on the four origin neighbors.
    let target = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
    let est = estimate_hitting_measure(&target, (30, 30), 10_000, 1, 100.0 * 43.0)
        .expect("estimate");
    println!("plus-shaped target from (30, 30): frequencies (expect ~0.25 each)");
    for (p, f) in est.target.iter().zip(est.frequencies()) {
        println!("  {p:?}: {f:.4}");
    }

    // Segment targets: the tip dominates and max H tracks 1/sqrt(r).
    println!("\nsegment targets, source at r^1.5 ln r on the axis, 10k replicas");
    println!("(the acceptance suite runs these at 1e6; expect ~half a minute here):");
    println!(
        "{:>3} {:>7} {:>11} {:>12} {:>10}",
        "r", "|x|", "max H", "max H sqrtr", "restarts"
    );
    for r in [4i64, 8, 16] {
        let rf = r as f64;
        let source = ((rf.powf(1.5) * rf.ln()).ceil() as i64, 0);
        let est = estimate_hitting_measure(
            &segment_target(r),
            source,
            10_000,
            2,
            100.0 * source.0 as f64,
        )
        .expect("estimate");
        let mx = est.max_frequency();
        println!(
            "{:>3} {:>7} {:>11.5} {:>12.4} {:>10}",
            r,
            source.0,
            mx,
            mx * rf.sqrt(),
            est.restarts
        );
    }
}
