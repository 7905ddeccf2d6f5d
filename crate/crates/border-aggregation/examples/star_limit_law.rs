//! The joint limit law of the rescaled surviving arm lengths.
//!
//! The K-1 survivor lengths over N^(3/4) converge to a vector with joint
//! survival function G(a) (a one-dimensional Gaussian integral) and density
//! f_zeta (closed form). This example compares G on a diagonal grid against
//! the empirical tail of death-coupling runs at N = 2000, and checks the
//! conditioned-Gaussian sampler against the density of sqrt(3)/2 zeta^2.
//!
//! Run: cargo run --release --example star_limit_law

use border_aggregation::experiment::par_replicas;
use border_aggregation::star::{
    limit_cdf_g, limit_density_f_zeta, sample_conditioned_gaussian_rep_with,
    simulate_death_coupling_with, LimitLawSpec,
};
use rand::SeedableRng;

fn main() {
    let k = 3u32;
    let n = 2000u32;
    let reps = 20_000u64;
    let spec = LimitLawSpec::new(k);
    let scale = (n as f64).powf(0.75);

    // Empirical joint tails of the surviving lengths in arm order.
    let survivors = par_replicas(reps, 99, |_, rng| {
        let res = simulate_death_coupling_with(n, k, rng).expect("death run");
        let mut lengths: Vec<f64> = res
            .remaining
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != res.istar)
            .map(|(_, &y)| y as f64 / scale)
            .collect();
        lengths.truncate(k as usize - 1);
        lengths
    });

    println!("K = {k}, N = {n}, {reps} replicas");
    println!(
        "{:>6} {:>12} {:>14} {:>12}",
        "a", "G(a,a)", "empirical", "f_zeta(a,a)"
    );
    for i in 0..=6 {
        let a = 0.25 * i as f64;
        let grid = vec![a; (k - 1) as usize];
        let g = limit_cdf_g(&grid, &spec).expect("G");
        let emp = survivors
            .iter()
            .filter(|v| v.iter().all(|&x| x > a))
            .count() as f64
            / reps as f64;
        let f = limit_density_f_zeta(&grid, k).expect("f_zeta");
        println!("{a:>6.2} {g:>12.6} {emp:>14.6} {f:>12.6}");
    }

    // Sampler for the conditioned Gaussian representation: the mapped
    // samples a = sqrt(2 b / sqrt 3) should follow f_zeta's marginal.
    let mut rng = border_aggregation::rng::ReplicaRng::seed_from_u64(5);
    let draws = 20_000;
    let mut mapped: Vec<f64> = (0..draws)
        .map(|_| {
            let b = sample_conditioned_gaussian_rep_with(k, &mut rng).expect("sample");
            (2.0 * b[0] / 3f64.sqrt()).sqrt()
        })
        .collect();
    mapped.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let quantile = |q: f64| mapped[(q * draws as f64) as usize];
    println!("\nconditioned-Gaussian sampler, mapped marginal quantiles:");
    for q in [0.25, 0.5, 0.75, 0.9] {
        println!("  q{:>2}: {:.4}", (q * 100.0) as u32, quantile(q));
    }
}
