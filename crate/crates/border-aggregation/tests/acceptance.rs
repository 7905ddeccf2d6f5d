//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`). Tolerances are pinned in
//! code; elapsed wall time is printed for transparency but not asserted,
//! since it depends on the host. Run with:
//!
//! ```text
//! cargo test -p border-aggregation --test acceptance -- --nocapture --test-threads 1
//! ```

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use border_aggregation::analysis::{
    chi_square_gof, fit_scaling, integrate_simpson, ks_distance, normal_cdf, tv_distance,
    SampleStats,
};
use border_aggregation::comb::{killed_walk_death_column, p_j_gamma, q_kill};
use border_aggregation::experiment::{
    comb_xi_sweep, fit_sweep, lattice_xi_sweep, par_replicas, star_replica, star_survivor_sweep,
    StarEngine,
};
use border_aggregation::lattice::{
    estimate_hitting_measure, segment_target, simulate_lattice, LatticeKind,
};
use border_aggregation::model::{run_ba, verify_outcome, GraphModel};
use border_aggregation::snapshot::{export_snapshot, SnapshotFormat};
use border_aggregation::star::{
    berry_esseen_bound, exact_star_pmf, limit_cdf_g, limit_density_f_zeta,
    standardized_tau_samples, LimitLawSpec,
};
use border_aggregation::tree::{simulate_tree, xi_tree_exact};

struct Criterion {
    id: u32,
    desc: &'static str,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(id: u32, desc: &'static str) -> Criterion {
        Criterion {
            id,
            desc,
            started: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn finish(self) {
        let secs = self.started.elapsed().as_secs_f64();
        if self.failures.is_empty() {
            println!(
                "ACCEPTANCE criterion {:02} PASS ({:.1}s) - {}",
                self.id, secs, self.desc
            );
        } else {
            println!(
                "ACCEPTANCE criterion {:02} FAIL ({:.1}s) - {}",
                self.id, secs, self.desc
            );
            for f in &self.failures {
                println!("    {f}");
            }
            panic!("acceptance criterion {} failed", self.id);
        }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn criterion_01_tree_exact_tables() {
    let mut c = Criterion::new(1, "exact xi tables on the binary tree (K = 4, 5)");
    let table4: Vec<(i64, BigRational)> = vec![
        (4, ratio(1, 8)),
        (5, ratio(1, 4)),
        (6, ratio(5, 16)),
        (7, ratio(15, 64)),
        (8, ratio(5, 64)),
    ];
    let table5: Vec<(i64, BigRational)> = vec![
        (5, ratio(1, 64)),
        (6, ratio(3, 64)),
        (7, ratio(45, 512)),
        (8, ratio(535, 4096)),
        (9, ratio(1335, 8192)),
        (10, ratio(355, 2048)),
        (11, ratio(5115, 32768)),
        (12, ratio(30525, 262144)),
        (13, ratio(9075, 131072)),
        (14, ratio(32175, 1048576)),
        (15, ratio(75075, 8388608)),
        (16, ratio(10725, 8388608)),
    ];
    for (k, table) in [(4u32, table4), (5u32, table5)] {
        let pmf = xi_tree_exact(k).expect("exact pmf");
        c.check(
            pmf.len() == table.len(),
            format!("K={k}: support size {} != {}", pmf.len(), table.len()),
        );
        for (value, mass) in table {
            let got = pmf.prob(value);
            c.check(
                got == mass,
                format!("K={k}: P(xi={value}) = {got}, want {mass}"),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_02_tree_means() {
    let mut c = Criterion::new(2, "exact tree means E[xi_K] for K = 3..8 within 0.5%");
    let reported = [(3u32, 3.5), (4, 5.89), (5, 9.82), (6, 16.4), (7, 27.6), (8, 46.8)];
    for (k, want) in reported {
        let mean = xi_tree_exact(k).expect("exact pmf").mean();
        let rel = (mean - want).abs() / want;
        c.check(
            rel < 0.005,
            format!("K={k}: mean {mean} vs reported {want} (rel {rel:.4})"),
        );
    }
    c.finish();
}

#[test]
fn criterion_03_tree_simulation_tv() {
    let mut c = Criterion::new(3, "tree simulation vs exact pmf: TV < 0.005 at 1e6 replicas");
    let reps = 1_000_000u64;
    let exact = xi_tree_exact(4).expect("exact pmf").to_f64_map();
    let xis = par_replicas(reps, 20240103, |_, rng| {
        border_aggregation::tree::simulate_tree_with(2, 4, rng)
            .expect("tree run")
            .0
            .xi as i64
    });
    let stats = SampleStats::from_samples(xis);
    let tv = tv_distance(&stats.frequencies(), &exact);
    c.check(tv < 0.005, format!("TV distance {tv}"));
    c.finish();
}

#[test]
fn criterion_04_star_engine_equivalence() {
    let mut c = Criterion::new(
        4,
        "star engines vs exact pmf: chi-square p > 0.001 at 1e5 replicas",
    );
    let reps = 100_000u64;
    for (n, k) in [(2u32, 2u32), (2, 3)] {
        let exact = exact_star_pmf(n, k).expect("exact pmf").to_f64_map();
        for engine in [StarEngine::Walk, StarEngine::Urn, StarEngine::Death] {
            let seed = 9_000 + n as u64 * 100 + k as u64 * 10 + engine as u64;
            let survivors = par_replicas(reps, seed, |r, _| {
                star_replica(engine, n, k, seed, r)
                    .expect("star replica")
                    .survivors as i64
            });
            let stats = SampleStats::from_samples(survivors);
            let p = chi_square_gof(&stats.histogram, &exact, reps, 5.0).expect("chi2");
            c.check(
                p > 0.001,
                format!("(N={n}, K={k}) {engine:?}: chi-square p = {p:.5}"),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_05_tau_clt_berry_esseen() {
    let mut c = Criterion::new(
        5,
        "standardized tau_1 at N = 1e4: KS below Berry-Esseen bound and 0.02",
    );
    let n = 10_000u32;
    let samples = standardized_tau_samples(n, 100_000, 20240105);
    let ks = ks_distance(&samples, normal_cdf).expect("ks");
    let bound = berry_esseen_bound(n);
    c.check(
        bound > 0.08 && bound < 0.09,
        format!("Berry-Esseen bound {bound} out of expected ballpark"),
    );
    c.check(ks < bound, format!("KS {ks} vs bound {bound}"));
    c.check(ks < 0.02, format!("KS {ks} vs headroom 0.02"));
    c.finish();
}

#[test]
fn criterion_06_limit_law_quadrature() {
    let mut c = Criterion::new(6, "limit-law quadrature identities (G, f_zeta)");
    for k in 2..=5u32 {
        let spec = LimitLawSpec::new(k);
        let g0 = limit_cdf_g(&vec![0.0; (k - 1) as usize], &spec).expect("G(0)");
        c.check((g0 - 1.0).abs() < 1e-8, format!("K={k}: G(0) = {g0}"));
    }
    // Density normalization: K=2 on [0, 8], K=3 on [0, 6]^2.
    let total2 = integrate_simpson(
        |a| limit_density_f_zeta(&[a], 2).expect("f_zeta"),
        0.0,
        8.0,
        4000,
    );
    c.check(
        (total2 - 1.0).abs() < 1e-3,
        format!("K=2: f_zeta integrates to {total2}"),
    );
    let inner = |x: f64| {
        integrate_simpson(
            |y| limit_density_f_zeta(&[x, y], 3).expect("f_zeta"),
            0.0,
            6.0,
            600,
        )
    };
    let total3 = integrate_simpson(inner, 0.0, 6.0, 600);
    c.check(
        (total3 - 1.0).abs() < 1e-3,
        format!("K=3: f_zeta integrates to {total3}"),
    );
    // K=2 closed form via the Gaussian identity.
    let spec = LimitLawSpec::new(2);
    let g1 = limit_cdf_g(&[1.0], &spec).expect("G(1)");
    let closed = 2.0 * (1.0 - normal_cdf(6f64.sqrt() / 4.0));
    c.check(
        (g1 - closed).abs() < 1e-6,
        format!("K=2: G((1)) = {g1} vs closed form {closed}"),
    );
    c.finish();
}

#[test]
fn criterion_07_survivor_scaling() {
    let mut c = Criterion::new(
        7,
        "star survivor scaling: slope of log E[S] vs log N = 0.75 +- 0.05",
    );
    let n_list = [250u32, 500, 1000, 2000, 4000];
    for k in [2u32, 3, 4] {
        let points =
            star_survivor_sweep(k, &n_list, 20_000, 20240107 + k as u64).expect("sweep");
        let fit = fit_sweep(&points).expect("fit");
        c.check(
            (fit.alpha - 0.75).abs() <= 0.05,
            format!("K={k}: slope {:.4}", fit.alpha),
        );
    }
    c.finish();
}

#[test]
fn criterion_08_comb_closed_forms() {
    let mut c = Criterion::new(8, "comb closed forms: p_j sums, killed-walk MC, q bracket");
    // Total mass of the killed-walk law.
    for gamma in [0.1, 0.5, 0.9] {
        let mut total = p_j_gamma(0, gamma).expect("p_0");
        let mut j = 1i64;
        loop {
            let p = p_j_gamma(j, gamma).expect("p_j");
            total += 2.0 * p;
            if p < 1e-18 {
                break;
            }
            j += 1;
        }
        c.check(
            (total - 1.0).abs() < 1e-12,
            format!("gamma={gamma}: total mass {total}"),
        );
    }
    // Monte Carlo killed walk at gamma = 0.5 against the closed form.
    let reps = 1_000_000u64;
    let cols = par_replicas(reps, 20240108, |_, rng| killed_walk_death_column(0.5, rng));
    let stats = SampleStats::from_samples(cols);
    for j in -5..=5i64 {
        let want = p_j_gamma(j, 0.5).expect("p_j");
        let got = *stats.histogram.get(&j).unwrap_or(&0) as f64 / reps as f64;
        let sigma = (want * (1.0 - want) / reps as f64).sqrt();
        c.check(
            (got - want).abs() < 3.0 * sigma,
            format!("j={j}: {got} vs {want} (3 sigma = {:.2e})", 3.0 * sigma),
        );
    }
    // Exhaustive kill-probability bracket at N = 100.
    let n = 100u32;
    let mut bracket_ok = true;
    for hp in n / 2..=n - 1 {
        for hm in n / 2..=n - 1 {
            let q = q_kill(hp, hm).expect("q");
            if !(q >= 1.0 / n as f64 && q <= 2.0 / (n as f64 + 2.0)) {
                bracket_ok = false;
            }
        }
    }
    c.check(bracket_ok, "q_kill outside [1/N, 2/(N+2)]".to_string());
    c.finish();
}

#[test]
fn criterion_09_comb_exponent() {
    let mut c = Criterion::new(9, "comb exponent over N in {8,16,32,64} within [1.35, 1.65]");
    let points = comb_xi_sweep(
        border_aggregation::comb::CombEngine::Embedded,
        &[8, 16, 32, 64],
        500,
        20240109,
    )
    .expect("sweep");
    let fit = fit_sweep(&points).expect("fit");
    c.check(
        (1.35..=1.65).contains(&fit.alpha),
        format!("fitted exponent {:.4}", fit.alpha),
    );
    c.finish();
}

#[test]
fn criterion_10_disc_exponent() {
    let mut c = Criterion::new(10, "disc-2d exponent over N in {16..96} exceeds 1.23");
    let points = lattice_xi_sweep(
        LatticeKind::Disc2d,
        2,
        &[16, 24, 32, 48, 64, 96],
        64,
        20240110,
    )
    .expect("sweep");
    let fit = fit_sweep(&points).expect("fit");
    c.check(fit.alpha > 1.23, format!("fitted exponent {:.4}", fit.alpha));
    c.finish();
}

#[test]
fn criterion_11_cube_exponent() {
    let mut c = Criterion::new(11, "Z^3 exponent over N in {8..32} exceeds 1.4");
    let points = lattice_xi_sweep(LatticeKind::Cube, 3, &[8, 12, 16, 24, 32], 64, 20240111)
        .expect("sweep");
    let fit = fit_sweep(&points).expect("fit");
    c.check(fit.alpha > 1.4, format!("fitted exponent {:.4}", fit.alpha));
    c.finish();
}

#[test]
fn criterion_12_hitting_measure() {
    let mut c = Criterion::new(
        12,
        "hitting measure: exact normalization, max H * sqrt(r) trend over r in {4,8,16}",
    );
    let reps = 1_000_000u64;
    let mut scaled = Vec::new();
    for r in [4i64, 8, 16] {
        let rf = r as f64;
        let source = ((rf.powf(1.5) * rf.ln()).ceil() as i64, 0i64);
        let enclosure = 100.0 * source.0 as f64;
        let est = estimate_hitting_measure(
            &segment_target(r),
            source,
            reps,
            20240112 + r as u64,
            enclosure,
        )
        .expect("hitting estimate");
        // Exact normalization is the integer accounting: every replica
        // lands exactly one hit. The f64 frequency sum only rounds.
        let hits: u64 = est.counts.iter().sum();
        c.check(
            hits == reps,
            format!("r={r}: {hits} hits recorded for {reps} replicas"),
        );
        let total: f64 = est.frequencies().iter().sum();
        c.check(
            (total - 1.0).abs() < 1e-12,
            format!("r={r}: frequencies sum to {total}"),
        );
        scaled.push(est.max_frequency() * rf.sqrt());
    }
    let (lo, hi) = (
        scaled.iter().cloned().fold(f64::INFINITY, f64::min),
        scaled.iter().cloned().fold(0.0f64, f64::max),
    );
    c.check(
        hi <= 1.5 * lo,
        format!("max H sqrt(r) spread {scaled:?}: ratio {:.3}", hi / lo),
    );
    c.finish();
}

#[test]
fn criterion_13_universal_invariants() {
    let mut c = Criterion::new(
        13,
        "xi bounds, adjacency reconstruction and byte-identical reruns on all families",
    );
    let models = [
        GraphModel::Star { arm_len: 3, arms: 3 },
        GraphModel::Tree { branching: 2, depth: 6 },
        GraphModel::Box2d { n: 6 },
        GraphModel::Disc2d { n: 12 },
        GraphModel::Comb { n: 4 },
        GraphModel::Cube { d: 3, n: 4 },
    ];
    for model in &models {
        for seed in 0..6u64 {
            // Reference engine.
            let a = run_ba(model, seed).expect("reference run");
            c.check(
                a.xi_within_bounds(),
                format!("{model:?} seed {seed}: xi {} outside bounds", a.xi),
            );
            if let Err(e) = verify_outcome(&a) {
                c.check(false, format!("{model:?} seed {seed}: {e}"));
            }
            let b = run_ba(model, seed).expect("reference rerun");
            let bytes_a = export_snapshot(&a, SnapshotFormat::Csv).expect("snapshot");
            let bytes_b = export_snapshot(&b, SnapshotFormat::Csv).expect("snapshot");
            c.check(
                bytes_a == bytes_b,
                format!("{model:?} seed {seed}: reference rerun differs"),
            );
            // Production engine where one exists.
            let tuned = match *model {
                GraphModel::Tree { branching, depth } => {
                    Some(simulate_tree(branching, depth, seed).expect("tree run").0)
                }
                GraphModel::Box2d { .. }
                | GraphModel::Disc2d { .. }
                | GraphModel::Cube { .. } => {
                    Some(simulate_lattice(model, seed, None).expect("lattice run"))
                }
                GraphModel::Comb { n } => Some(
                    border_aggregation::comb::simulate_comb(
                        n,
                        seed,
                        border_aggregation::comb::CombEngine::Embedded,
                    )
                    .expect("comb run")
                    .0,
                ),
                GraphModel::Star { arm_len, arms } => {
                    // No snapshot surface for the urn result; check the
                    // engines' own determinism directly instead.
                    let u1 = border_aggregation::star::simulate_urn(arm_len, arms, seed)
                        .expect("urn");
                    let u2 = border_aggregation::star::simulate_urn(arm_len, arms, seed)
                        .expect("urn rerun");
                    c.check(
                        u1 == u2,
                        format!("star seed {seed}: urn rerun differs"),
                    );
                    let d1 = border_aggregation::star::simulate_death_coupling(
                        arm_len, arms, seed,
                    )
                    .expect("death");
                    let d2 = border_aggregation::star::simulate_death_coupling(
                        arm_len, arms, seed,
                    )
                    .expect("death rerun");
                    c.check(
                        d1 == d2,
                        format!("star seed {seed}: death rerun differs"),
                    );
                    None
                }
            };
            if let Some(out) = tuned {
                c.check(
                    out.xi_within_bounds(),
                    format!("{model:?} seed {seed}: tuned xi {} outside bounds", out.xi),
                );
                if let Err(e) = verify_outcome(&out) {
                    c.check(false, format!("{model:?} seed {seed} tuned: {e}"));
                }
                let rerun = match *model {
                    GraphModel::Tree { branching, depth } => {
                        simulate_tree(branching, depth, seed).expect("tree rerun").0
                    }
                    GraphModel::Comb { n } => {
                        border_aggregation::comb::simulate_comb(
                            n,
                            seed,
                            border_aggregation::comb::CombEngine::Embedded,
                        )
                        .expect("comb rerun")
                        .0
                    }
                    _ => simulate_lattice(model, seed, None).expect("lattice rerun"),
                };
                c.check(
                    export_snapshot(&out, SnapshotFormat::Csv).expect("snap")
                        == export_snapshot(&rerun, SnapshotFormat::Csv).expect("snap"),
                    format!("{model:?} seed {seed}: tuned rerun differs"),
                );
            }
        }
    }
    // Degenerate cases with pinned xi.
    for seed in 0..10u64 {
        c.check(
            run_ba(&GraphModel::Tree { branching: 2, depth: 1 }, seed)
                .expect("run")
                .xi
                == 1,
            "tree K=1 must give xi = 1".to_string(),
        );
        c.check(
            run_ba(&GraphModel::Star { arm_len: 1, arms: 2 }, seed)
                .expect("run")
                .xi
                == 2,
            "star N=1 K=2 must give xi = 2".to_string(),
        );
        c.check(
            simulate_lattice(&GraphModel::Disc2d { n: 2 }, seed, None)
                .expect("run")
                .xi
                == 1,
            "disc N=2 must give xi = 1".to_string(),
        );
    }
    c.finish();
}


#[test]
fn acceptance_smoke_fit_scaling_used_by_criteria() {
    // The exponent criteria lean on fit_scaling; pin its exactness here too.
    let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0].iter().map(|&n| (n, n.powf(1.5))).collect();
    assert!((fit_scaling(&pts).unwrap().alpha - 1.5).abs() < 1e-12);
}
