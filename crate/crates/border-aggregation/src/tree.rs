//! Aggregation on regular d-ary trees.
//!
//! The walk moves only away from the root, uniformly among children, so a
//! particle is a lazy root-to-leaf path that stops at the first vertex with
//! a sticky child.
//!
//! For the binary tree the law of xi obeys a coin-race recursion: the next
//! xi is one more than the number of fair-coin tosses needed for one of two
//! independent copies of the previous xi to be exhausted (heads feed one
//! subtree, tails the other). [`xi_tree_exact`] evaluates it in exact
//! rational arithmetic through the survival-function convolution
//!
//! ```text
//! P(xi_{K+1} > 1 + l) = sum_h C(l, h) 2^{-l} P(xi_K > h) P(xi_K > l - h).
//! ```
//!
//! A d >= 3 analogue of the recursion exists but is unwieldy; those trees
//! are handled by simulation only.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngExt};

use crate::model::{BaOutcome, GraphModel, StickEvent};
use crate::pmf::{binomial, Pmf};
use crate::rng::replica_rng;
use crate::{Error, Result};

/// Exact arithmetic stays practical up to here; support size 2^(K-1) and
/// denominator growth dominate beyond K ~ 11.
pub const XI_TREE_EXACT_K_MAX: u32 = 14;

/// Level bookkeeping of one simulated run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRunExtras {
    /// `first_stick[i]` = index of the first particle stuck at level i,
    /// defined for 0 <= i <= K-1.
    pub first_stick: Vec<u64>,
    /// Sticky vertices per level at the end of the run.
    pub sticky_count: Vec<u64>,
}

/// Number of fair-coin tosses to reach either `a` heads or `b` tails:
/// `P(eta = l) = [C(l-1, l-b) + C(l-1, l-a)] / 2^l` on
/// `min(a,b) <= l <= a+b-1`.
pub fn eta_pmf(a: u32, b: u32) -> Result<Pmf> {
    if a < 1 || b < 1 {
        return Err(Error::config("eta needs a, b >= 1"));
    }
    let (a, b) = (a as i64, b as i64);
    let mut parts = Vec::new();
    for l in a.min(b)..=a + b - 1 {
        let num = binomial(l - 1, l - b) + binomial(l - 1, l - a);
        let mass = BigRational::new(num, BigInt::from(2).pow(l as u32));
        parts.push((l, mass));
    }
    Pmf::from_parts(parts)
}

/// Exact law of xi on the binary tree of depth `k`.
pub fn xi_tree_exact(k: u32) -> Result<Pmf> {
    if k < 1 {
        return Err(Error::config("xi_tree_exact needs K >= 1"));
    }
    if k > XI_TREE_EXACT_K_MAX {
        return Err(Error::guard(format!(
            "xi_tree_exact: K = {k} exceeds K_max = {XI_TREE_EXACT_K_MAX}"
        )));
    }
    // Survival function of the current level as exact rationals; index m
    // holds P(xi > m). Support of xi_K is [K, 2^(K-1)], so the vector is
    // kept at length 2^(K-1) + 1 with a zero in the last slot.
    let mut survival: Vec<BigRational> = vec![BigRational::one(), BigRational::zero()];
    let mut level = 1u32;
    while level < k {
        let support_max = survival.len() - 1; // P(xi > support_max) = 0
        let next_max = 2 * support_max;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut next: Vec<BigRational> = Vec::with_capacity(next_max + 1);
        next.push(BigRational::one()); // P(xi' > 0), xi' >= level+1 >= 2
        // Pascal row C(l, .) built incrementally.
        let mut row: Vec<BigInt> = vec![BigInt::one()];
        let mut pow_half = BigRational::one();
        for l in 0..next_max {
            // row currently holds C(l, 0..=l); pow_half = 2^{-l}.
            let mut acc = BigRational::zero();
            for (h, c) in row.iter().enumerate() {
                let gh = &survival[h.min(support_max)];
                let gt = &survival[(l - h).min(support_max)];
                if !gh.is_zero() && !gt.is_zero() {
                    acc += BigRational::from(c.clone()) * gh * gt;
                }
            }
            next.push(acc * &pow_half);
            // Advance Pascal row to l+1 and the power of 1/2.
            let mut new_row = Vec::with_capacity(row.len() + 1);
            new_row.push(BigInt::one());
            for w in row.windows(2) {
                new_row.push(&w[0] + &w[1]);
            }
            new_row.push(BigInt::one());
            row = new_row;
            pow_half *= &half;
        }
        debug_assert!(next.last().map(|m| m.is_zero()).unwrap_or(false));
        survival = next;
        level += 1;
    }
    // pmf at m: P(xi > m-1) - P(xi > m); survival[m] covers m <= len-1.
    let mut parts = Vec::new();
    for m in 1..survival.len() {
        let mass = &survival[m - 1] - &survival[m];
        if !mass.is_zero() {
            parts.push((m as i64, mass));
        }
    }
    Pmf::from_parts(parts)
}

/// Fixed-precision variant of the recursion for K beyond the exact guard.
/// Each level is renormalized; the pre-normalization drift is returned with
/// the masses and must stay tiny for the result to be trusted. Not used by
/// any golden test.
pub fn xi_tree_float(k: u32) -> Result<(Vec<(i64, f64)>, f64)> {
    if k < 1 {
        return Err(Error::config("xi_tree_float needs K >= 1"));
    }
    if k > 16 {
        return Err(Error::guard("xi_tree_float: K > 16 support is too wide"));
    }
    let mut survival: Vec<f64> = vec![1.0, 0.0];
    for _ in 1..k {
        let support_max = survival.len() - 1;
        let next_max = 2 * support_max;
        let mut next = vec![0.0f64; next_max + 1];
        next[0] = 1.0;
        // Normalized Pascal row: row[h] = C(l, h) / 2^l, which stays in
        // [0, 1] where raw binomials would overflow f64.
        let mut row = vec![1.0f64];
        for l in 0..next_max {
            let mut acc = 0.0;
            for (h, c) in row.iter().enumerate() {
                acc += c * survival[h.min(support_max)] * survival[(l - h).min(support_max)];
            }
            next[l + 1] = acc;
            let mut new_row = Vec::with_capacity(row.len() + 1);
            new_row.push(row[0] * 0.5);
            for w in row.windows(2) {
                new_row.push((w[0] + w[1]) * 0.5);
            }
            new_row.push(row[row.len() - 1] * 0.5);
            row = new_row;
        }
        survival = next;
    }
    let masses: Vec<(i64, f64)> = (1..survival.len())
        .map(|m| (m as i64, survival[m - 1] - survival[m]))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let total: f64 = masses.iter().map(|&(_, p)| p).sum();
    let drift = (total - 1.0).abs();
    let normalized = masses.into_iter().map(|(m, p)| (m, p / total)).collect();
    Ok((normalized, drift))
}

/// Non-random upper bound `(d^(K-1) - 1)/(d - 1) + 1`: at most d^(i-1)
/// particles stick on level i, plus the final particle at the origin.
pub fn tree_upper_bound(d: u32, k: u32) -> Result<u64> {
    if d < 2 || k < 2 {
        return Err(Error::config("tree_upper_bound needs d >= 2, K >= 2"));
    }
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..k - 1 {
        total += pow;
        pow = pow
            .checked_mul(d as u128)
            .ok_or_else(|| Error::guard("tree_upper_bound overflow"))?;
    }
    u64::try_from(total + 1).map_err(|_| Error::guard("tree_upper_bound overflow"))
}

/// Simulates one run on the d-ary tree of depth `k`.
///
/// Draw order: one uniform child index per downward step, identical to the
/// reference engine's walk, so the same (model, seed) produce the same run.
pub fn simulate_tree(d: u32, k: u32, seed: u64) -> Result<(BaOutcome, TreeRunExtras)> {
    simulate_tree_with(d, k, &mut replica_rng(seed, 0))
}

pub fn simulate_tree_with<R: Rng>(
    d: u32,
    k: u32,
    rng: &mut R,
) -> Result<(BaOutcome, TreeRunExtras)> {
    let model = GraphModel::Tree {
        branching: d,
        depth: k,
    };
    model.validate()?;
    let interior_levels = k as usize; // levels 0..K-1 can hold sticks
    let mut size: u64 = 1;
    let mut level_size = Vec::with_capacity(interior_levels);
    for _ in 0..interior_levels {
        level_size.push(size);
        if size.saturating_mul(d as u64) > (1 << 26) {
            return Err(Error::guard("simulate_tree: tree too large for flags"));
        }
        size *= d as u64;
    }
    let mut sticky: Vec<Vec<bool>> = level_size.iter().map(|&s| vec![false; s as usize]).collect();
    // Vertices on level K-1 start with sticky (border) children.
    let mut sticky_child: Vec<Vec<bool>> = level_size
        .iter()
        .enumerate()
        .map(|(l, &s)| vec![l == interior_levels - 1; s as usize])
        .collect();

    let mut events = Vec::new();
    let mut first_stick = vec![0u64; interior_levels];
    let mut sticky_count = vec![0u64; interior_levels];
    let mut n: u64 = 0;
    loop {
        n += 1;
        let mut level = 0usize;
        let mut idx = 0u64;
        loop {
            if sticky_child[level][idx as usize] {
                sticky[level][idx as usize] = true;
                sticky_count[level] += 1;
                if first_stick[level] == 0 {
                    first_stick[level] = n;
                }
                if level > 0 {
                    sticky_child[level - 1][(idx / d as u64) as usize] = true;
                }
                events.push(StickEvent {
                    n,
                    coords: vec![level as i64, idx as i64],
                });
                break;
            }
            let c = rng.random_range(0..d) as u64;
            level += 1;
            idx = idx * d as u64 + c;
        }
        if level == 0 {
            break;
        }
    }

    Ok((
        BaOutcome {
            model,
            xi: n,
            stick_events: events,
        },
        TreeRunExtras {
            first_stick,
            sticky_count,
        },
    ))
}

/// Tail of the generalized birthday count for m = 2:
/// `P(zeta > t) = prod_{i=1}^{t-1} (1 - i/A)`. Returns 0 once `t` exceeds
/// the number of distinct outcomes plus one.
pub fn birthday_tail(a: u64, t: u64) -> Result<f64> {
    if a < 1 || t < 1 {
        return Err(Error::config("birthday_tail needs A >= 1, t >= 1"));
    }
    if t > a + 1 {
        return Ok(0.0);
    }
    let af = a as f64;
    Ok((1..t).map(|i| 1.0 - i as f64 / af).product())
}

/// Uniform trials over `a` outcomes until some outcome occurs `m` times;
/// returns the number of trials.
pub fn simulate_zeta_km(a: u64, m: u32, seed: u64) -> Result<u64> {
    simulate_zeta_km_with(a, m, &mut replica_rng(seed, 0))
}

pub fn simulate_zeta_km_with<R: Rng>(a: u64, m: u32, rng: &mut R) -> Result<u64> {
    if a < 1 || m < 1 {
        return Err(Error::config("zeta_{K,m} needs A >= 1, m >= 1"));
    }
    if a > (1 << 26) {
        return Err(Error::guard("simulate_zeta_km: A too large for counts"));
    }
    let mut counts = vec![0u32; a as usize];
    let mut trials = 0u64;
    loop {
        trials += 1;
        let slot = rng.random_range(0..a) as usize;
        counts[slot] += 1;
        if counts[slot] >= m {
            return Ok(trials);
        }
    }
}

/// Exact mean of xi_K as f64.
pub fn xi_tree_mean(k: u32) -> Result<f64> {
    Ok(xi_tree_exact(k)?.mean())
}
