//! Aggregation on Z^2 (box and disc borders) and Z^d cubes, plus
//! hitting-measure estimation and ring-crossing diagnostics.
//!
//! The production walker accelerates the diffusive legs exactly: while the
//! walk is at L1 distance at least m+2 from every sticky vertex, its
//! position after m more steps is sampled in closed form (per-axis step
//! counts are multinomial, signs are fair binomials; in 2-D the two
//! diagonal coordinates are independent simple walks), and no stick event
//! can be missed because the walk moves one L1 unit per step. Near the
//! cluster it falls back to literal stepping against a flags grid. The
//! distance to the sticky set is lower-bounded by `rho_min - |pos|`, where
//! `rho_min` is the smallest norm of any sticky vertex so far (L-infinity
//! norm for the box model, Euclidean otherwise).
//!
//! The hitting-measure estimator uses the same jump trick around a small
//! target set, with walks restarted from the source when they leave the
//! enclosure.

use std::collections::HashMap;

use rand::{Rng, RngExt};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{BaOutcome, GraphModel, StickEvent, MAX_CUBE_DIM};
use crate::rng::{replica_rng, BitPairs};
use crate::{Error, Result};

const FLAG_STICKY: u8 = 1;
const FLAG_ADJACENT: u8 = 2;

/// Largest flags grid the simulator will allocate.
const GRID_CELL_CAP: u128 = 1 << 26;

/// Minimum profitable jump length for aggregation walks.
const JUMP_MIN: i64 = 12;

/// Minimum profitable jump length for hitting-measure walks.
const JUMP_MIN_HIT: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Box2d,
    Disc2d,
    Cube,
}

/// Builds the lattice model for the requested border shape, rejecting
/// invalid (kind, d) combinations.
pub fn build_lattice_model(kind: LatticeKind, d: u32, n: u32) -> Result<GraphModel> {
    let model = match kind {
        LatticeKind::Box2d => {
            if d != 2 {
                return Err(Error::config(format!("box2d needs d = 2, got {d}")));
            }
            GraphModel::Box2d { n }
        }
        LatticeKind::Disc2d => {
            if d != 2 {
                return Err(Error::config(format!("disc2d needs d = 2, got {d}")));
            }
            GraphModel::Disc2d { n }
        }
        LatticeKind::Cube => GraphModel::Cube { d, n },
    };
    model.validate()?;
    Ok(model)
}

/// Popcount of `m` fair bits: exact Binomial(m, 1/2) for small m.
#[inline]
fn popcount_bits<R: Rng>(m: u64, rng: &mut R) -> u64 {
    let mut left = m;
    let mut c = 0u64;
    while left >= 64 {
        c += rng.next_u64().count_ones() as u64;
        left -= 64;
    }
    if left > 0 {
        c += (rng.next_u64() & ((1u64 << left) - 1)).count_ones() as u64;
    }
    c
}

/// Cached inverse-CDF tables for Binomial(m0, 1/2) on a fixed grid of m0.
///
/// A draw for arbitrary m splits as Binomial(m0) + Binomial(m - m0) with
/// m0 = m rounded down to the grid: the table serves the bulk, the residual
/// (< GRID bits) is a popcount. Table construction is O(m0) once per
/// process; sampling is one uniform plus a binary search.
struct BinomTable {
    /// First value covered by the window (the mass below is < 1e-22 and
    /// collapses onto the window edge, far below the uniform draw's
    /// resolution).
    offset: u32,
    /// cdf[j] = P(X <= offset + j) over a +-10 sigma window.
    cdf: Vec<f64>,
    /// guide[i] = first window index with cdf >= i / GUIDE_BUCKETS, so a
    /// draw lands in a bucket of at most a few CDF entries.
    guide: Vec<u32>,
}

struct HalfBinomialTables {
    tables: Vec<std::sync::OnceLock<BinomTable>>,
}

const BINOM_GRID: u64 = 256;
const BINOM_TABLE_MAX: u64 = 1 << 16;
const GUIDE_BUCKETS: usize = 4096;

static BINOM_TABLES: std::sync::OnceLock<HalfBinomialTables> = std::sync::OnceLock::new();

impl HalfBinomialTables {
    fn global() -> &'static HalfBinomialTables {
        BINOM_TABLES.get_or_init(|| HalfBinomialTables {
            tables: (0..=(BINOM_TABLE_MAX / BINOM_GRID) as usize)
                .map(|_| std::sync::OnceLock::new())
                .collect(),
        })
    }

    fn table(&self, n: u64) -> &BinomTable {
        debug_assert_eq!(n % BINOM_GRID, 0);
        self.tables[(n / BINOM_GRID) as usize].get_or_init(|| {
            let n = n as usize;
            let mid = n / 2;
            let sigma = (n as f64 / 4.0).sqrt();
            let half_window = ((10.0 * sigma) as usize).max(32).min(mid);
            let lo = mid - half_window;
            let hi = (mid + half_window).min(n);
            // Outward recurrence from the mode keeps everything in range.
            let mut pmf = vec![0.0f64; hi - lo + 1];
            pmf[mid - lo] = 1.0;
            for k in mid..hi {
                pmf[k - lo + 1] = pmf[k - lo] * (n - k) as f64 / (k + 1) as f64;
            }
            for k in (lo + 1..=mid).rev() {
                pmf[k - lo - 1] = pmf[k - lo] * k as f64 / (n - k + 1) as f64;
            }
            let total: f64 = pmf.iter().sum();
            let mut acc = 0.0;
            for p in pmf.iter_mut() {
                acc += *p / total;
                *p = acc;
            }
            let mut cdf = pmf;
            // Pin the last entry so the inverse walk cannot run off the end.
            *cdf.last_mut().expect("non-empty cdf") = 1.0;
            let mut guide = vec![0u32; GUIDE_BUCKETS + 2];
            let mut k = 0usize;
            for (i, slot) in guide.iter_mut().enumerate() {
                let threshold = i as f64 / GUIDE_BUCKETS as f64;
                while k < cdf.len() && cdf[k] < threshold {
                    k += 1;
                }
                *slot = k as u32;
            }
            BinomTable {
                offset: lo as u32,
                cdf,
                guide,
            }
        })
    }

    #[inline]
    fn sample<R: Rng>(&self, n: u64, rng: &mut R) -> u64 {
        let t = self.table(n);
        let u: f64 = rng.random();
        let bucket = (u * GUIDE_BUCKETS as f64) as usize;
        let mut k = t.guide[bucket] as usize;
        // Walk forward to the inverse-CDF point; buckets hold O(1) entries.
        while t.cdf[k] <= u {
            k += 1;
        }
        t.offset as u64 + k as u64
    }
}

/// Exact Binomial(m, 1/2): popcount of fair bits for small m, cached table
/// plus popcount residual in the mid range, BTPE for very large m.
#[inline]
fn binom_half<R: Rng>(m: u64, rng: &mut R) -> u64 {
    if m < 2 * BINOM_GRID {
        popcount_bits(m, rng)
    } else if m <= BINOM_TABLE_MAX {
        let m0 = m & !(BINOM_GRID - 1);
        HalfBinomialTables::global().sample(m0, rng) + popcount_bits(m - m0, rng)
    } else {
        Binomial::new(m, 0.5).expect("valid binomial").sample(rng)
    }
}

/// Exact 2-D SRW displacement after `m` steps: the diagonal coordinates are
/// independent one-dimensional walks.
#[inline]
fn jump_2d<R: Rng>(m: i64, rng: &mut R) -> (i64, i64) {
    let k1 = binom_half(m as u64, rng) as i64;
    let k2 = binom_half(m as u64, rng) as i64;
    (k1 + k2 - m, k1 - k2)
}

/// Exact d-dimensional SRW displacement after `m` steps: axis step counts
/// are multinomial, per-axis signs fair.
fn jump_nd<R: Rng>(m: u64, d: u32, rng: &mut R, delta: &mut [i64]) {
    let mut left = m;
    for axis in 0..d {
        let m_axis = if axis + 1 == d {
            left
        } else {
            let p = 1.0 / (d - axis) as f64;
            Binomial::new(left, p).expect("valid binomial").sample(rng)
        };
        let pos_steps = binom_half(m_axis, rng) as i64;
        delta[axis as usize] = 2 * pos_steps - m_axis as i64;
        left -= m_axis;
    }
}

/// Pre-built flags grid for one lattice model, cloned per replica.
#[derive(Clone)]
pub struct LatticeBase {
    model: GraphModel,
    d: u32,
    n: i64,
    side: i64,
    strides: [i64; MAX_CUBE_DIM as usize],
    flags: Vec<u8>,
    disc_border: bool,
    /// Smallest sticky norm at start (L-infinity for box, Euclidean else).
    rho_min_init: f64,
    xi_cap: u64,
}

impl LatticeBase {
    pub fn new(model: &GraphModel) -> Result<LatticeBase> {
        model.validate()?;
        let (d, n, disc_border) = match *model {
            GraphModel::Box2d { n } => (2u32, n as i64, false),
            GraphModel::Disc2d { n } => (2u32, n as i64, true),
            GraphModel::Cube { d, n } => (d, n as i64, true),
            _ => return Err(Error::config("not a lattice model")),
        };
        let side = 2 * n + 1;
        let cells = (side as u128).pow(d);
        if cells > GRID_CELL_CAP {
            return Err(Error::guard(format!(
                "lattice grid of {cells} cells exceeds cap {GRID_CELL_CAP}"
            )));
        }
        let mut strides = [0i64; MAX_CUBE_DIM as usize];
        let mut s = 1i64;
        for a in 0..d as usize {
            strides[a] = s;
            s *= side;
        }
        let mut base = LatticeBase {
            model: *model,
            d,
            n,
            side,
            strides,
            flags: vec![0u8; cells as usize],
            disc_border,
            rho_min_init: if disc_border { (n - 1) as f64 } else { n as f64 },
            xi_cap: model.xi_upper_bound().expect("finite lattice"),
        };
        base.init_flags();
        Ok(base)
    }

    fn is_border_coords(&self, v: &[i64]) -> bool {
        if self.disc_border {
            let norm_sq: i64 = v.iter().map(|&x| x * x).sum();
            norm_sq >= (self.n - 1) * (self.n - 1)
        } else {
            v.iter().any(|&x| x.abs() == self.n)
        }
    }

    fn init_flags(&mut self) {
        let d = self.d as usize;
        let mut v = vec![-self.n; d];
        let cells = self.flags.len();
        for idx in 0..cells {
            if self.is_border_coords(&v) {
                self.flags[idx] |= FLAG_STICKY;
                // Mark in-grid neighbors adjacent.
                for a in 0..d {
                    if v[a] > -self.n {
                        self.flags[idx - self.strides[a] as usize] |= FLAG_ADJACENT;
                    }
                    if v[a] < self.n {
                        self.flags[idx + self.strides[a] as usize] |= FLAG_ADJACENT;
                    }
                }
            }
            // Advance odometer.
            for a in 0..d {
                v[a] += 1;
                if v[a] <= self.n {
                    break;
                }
                v[a] = -self.n;
            }
        }
    }

    #[inline]
    fn index(&self, v: &[i64]) -> usize {
        let mut idx = 0i64;
        for a in 0..self.d as usize {
            idx += (v[a] + self.n) * self.strides[a];
        }
        idx as usize
    }
}

/// Runs one aggregation on a prepared lattice.
///
/// `cap` guards against runaway configurations; it defaults to the exact
/// upper bound |G| - |B| and errors out if exceeded.
pub fn simulate_from_base(base: &LatticeBase, seed: u64, cap: Option<u64>) -> Result<BaOutcome> {
    simulate_from_base_with(base, &mut replica_rng(seed, 0), cap)
}

pub fn simulate_from_base_with<R: Rng>(
    base: &LatticeBase,
    rng: &mut R,
    cap: Option<u64>,
) -> Result<BaOutcome> {
    let cap = cap.unwrap_or(base.xi_cap);
    if cap < base.xi_cap {
        return Err(Error::config(format!(
            "cap {cap} below the exact upper bound {}",
            base.xi_cap
        )));
    }
    let mut flags = base.flags.clone();
    if base.d == 2 {
        simulate_2d(base, &mut flags, rng, cap)
    } else {
        simulate_nd(base, &mut flags, rng, cap)
    }
}

/// Convenience wrapper building the grid for a single run.
pub fn simulate_lattice(model: &GraphModel, seed: u64, cap: Option<u64>) -> Result<BaOutcome> {
    let base = LatticeBase::new(model)?;
    simulate_from_base(&base, seed, cap)
}

/// Jump-eligibility threshold: squared Euclidean (or plain L-infinity)
/// bound under which a jump of at least JUMP_MIN steps is safe.
fn jump_threshold(rho_min: f64) -> f64 {
    rho_min - (JUMP_MIN + 2) as f64
}

fn simulate_2d<R: Rng>(
    base: &LatticeBase,
    flags: &mut [u8],
    rng: &mut R,
    cap: u64,
) -> Result<BaOutcome> {
    let n = base.n;
    let side = base.side;
    let origin_idx = (n * side + n) as usize;
    let box_norm = !base.disc_border;
    let mut rho_min = base.rho_min_init;
    let thr_sq = |rho: f64| {
        let t = jump_threshold(rho);
        if t <= 1.0 {
            -1i64
        } else {
            (t * t).floor() as i64
        }
    };
    let mut jump_thr_sq = thr_sq(rho_min);
    let mut events: Vec<StickEvent> = Vec::new();
    let mut bits = BitPairs::new();
    let mut count: u64 = 0;

    'particles: loop {
        count += 1;
        if count > cap {
            return Err(Error::guard(format!("particle cap {cap} exceeded")));
        }
        if flags[origin_idx] & FLAG_ADJACENT != 0 {
            events.push(StickEvent { n: count, coords: vec![0, 0] });
            break 'particles;
        }
        let (mut x, mut y) = (0i64, 0i64);
        loop {
            // Far-field jump: distance to every sticky vertex is at least
            // rho_min - |pos| (L1 >= L2 >= radial gap).
            let gauge = if box_norm {
                let l = x.abs().max(y.abs());
                l * l
            } else {
                x * x + y * y
            };
            if gauge < jump_thr_sq {
                let budget = (rho_min - (gauge as f64).sqrt()).floor() as i64 - 2;
                let (dx, dy) = jump_2d(budget, rng);
                x += dx;
                y += dy;
                continue;
            }
            match bits.next(rng) {
                0 => x += 1,
                1 => x -= 1,
                2 => y += 1,
                _ => y -= 1,
            }
            let idx = ((y + n) * side + (x + n)) as usize;
            if flags[idx] & FLAG_ADJACENT != 0 {
                flags[idx] |= FLAG_STICKY;
                for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                    if nx.abs() <= n && ny.abs() <= n {
                        flags[((ny + n) * side + (nx + n)) as usize] |= FLAG_ADJACENT;
                    }
                }
                let norm = if box_norm {
                    x.abs().max(y.abs()) as f64
                } else {
                    ((x * x + y * y) as f64).sqrt()
                };
                if norm < rho_min {
                    rho_min = norm;
                    jump_thr_sq = thr_sq(rho_min);
                }
                events.push(StickEvent { n: count, coords: vec![x, y] });
                break;
            }
        }
    }

    Ok(BaOutcome {
        model: base.model,
        xi: count,
        stick_events: events,
    })
}

fn simulate_nd<R: Rng>(
    base: &LatticeBase,
    flags: &mut [u8],
    rng: &mut R,
    cap: u64,
) -> Result<BaOutcome> {
    let d = base.d as usize;
    let n = base.n;
    let origin_idx = base.index(&vec![0i64; d]);
    let mut rho_min = base.rho_min_init;
    let thr_sq = |rho: f64| {
        let t = jump_threshold(rho);
        if t <= 1.0 {
            -1i64
        } else {
            (t * t).floor() as i64
        }
    };
    let mut jump_thr_sq = thr_sq(rho_min);
    let mut events: Vec<StickEvent> = Vec::new();
    let mut count: u64 = 0;
    let mut pos = vec![0i64; d];
    let mut delta = vec![0i64; d];

    'particles: loop {
        count += 1;
        if count > cap {
            return Err(Error::guard(format!("particle cap {cap} exceeded")));
        }
        if flags[origin_idx] & FLAG_ADJACENT != 0 {
            events.push(StickEvent { n: count, coords: vec![0; d] });
            break 'particles;
        }
        pos.iter_mut().for_each(|c| *c = 0);
        loop {
            let norm_sq: i64 = pos.iter().map(|&c| c * c).sum();
            if norm_sq < jump_thr_sq {
                let budget = (rho_min - (norm_sq as f64).sqrt()).floor() as i64 - 2;
                jump_nd(budget as u64, base.d, rng, &mut delta);
                for (p, dl) in pos.iter_mut().zip(&delta) {
                    *p += dl;
                }
                continue;
            }
            let dir = rng.random_range(0..2 * base.d);
            let axis = (dir >> 1) as usize;
            pos[axis] += if dir & 1 == 0 { 1 } else { -1 };
            let idx = base.index(&pos);
            if flags[idx] & FLAG_ADJACENT != 0 {
                flags[idx] |= FLAG_STICKY;
                for a in 0..d {
                    if pos[a] > -n {
                        flags[idx - base.strides[a] as usize] |= FLAG_ADJACENT;
                    }
                    if pos[a] < n {
                        flags[idx + base.strides[a] as usize] |= FLAG_ADJACENT;
                    }
                }
                let norm = (pos.iter().map(|&c| c * c).sum::<i64>() as f64).sqrt();
                if norm < rho_min {
                    rho_min = norm;
                    jump_thr_sq = thr_sq(rho_min);
                }
                events.push(StickEvent { n: count, coords: pos.clone() });
                break;
            }
        }
    }

    Ok(BaOutcome {
        model: base.model,
        xi: count,
        stick_events: events,
    })
}

/// Monte Carlo estimate of the first-hit distribution H(x, y) over a finite
/// target set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HittingEstimate {
    pub target: Vec<(i64, i64)>,
    pub source: (i64, i64),
    pub counts: Vec<u64>,
    pub reps: u64,
    /// Walks restarted after leaving the enclosure.
    pub restarts: u64,
    pub enclosure_radius: f64,
}

impl HittingEstimate {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.reps as f64).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequencies().into_iter().fold(0.0, f64::max)
    }
}

struct HitTarget {
    min_x: i64,
    max_x: i64,
    min_y: i64,
    max_y: i64,
    width: i64,
    membership: Vec<bool>,
    index: HashMap<(i64, i64), usize>,
}

impl HitTarget {
    fn new(points: &[(i64, i64)]) -> HitTarget {
        let min_x = points.iter().map(|p| p.0).min().unwrap();
        let max_x = points.iter().map(|p| p.0).max().unwrap();
        let min_y = points.iter().map(|p| p.1).min().unwrap();
        let max_y = points.iter().map(|p| p.1).max().unwrap();
        let width = max_x - min_x + 1;
        let height = max_y - min_y + 1;
        let mut membership = vec![false; (width * height) as usize];
        let mut index = HashMap::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            membership[((y - min_y) * width + (x - min_x)) as usize] = true;
            index.insert((x, y), i);
        }
        HitTarget {
            min_x,
            max_x,
            min_y,
            max_y,
            width,
            membership,
            index,
        }
    }

    #[inline]
    fn contains(&self, x: i64, y: i64) -> bool {
        if x < self.min_x || x > self.max_x || y < self.min_y || y > self.max_y {
            return false;
        }
        self.membership[((y - self.min_y) * self.width + (x - self.min_x)) as usize]
    }

    /// Lower bound on the L1 distance to the target (distance to its
    /// bounding box).
    #[inline]
    fn l1_lower_bound(&self, x: i64, y: i64) -> i64 {
        let dx = (self.min_x - x).max(x - self.max_x).max(0);
        let dy = (self.min_y - y).max(y - self.max_y).max(0);
        dx + dy
    }
}

/// Estimates H(x, y) = P_x(walk first hits the target at y).
///
/// Walks are exact simple random walks; diffusive legs use closed-form
/// jumps that provably cannot cross the target or the enclosure rim. A walk
/// that leaves the enclosure restarts from the source (the enclosure must
/// be at least 100 |x|, which keeps the conditioning bias small). Every
/// replica ends with exactly one hit, so the frequencies sum to one.
pub fn estimate_hitting_measure(
    target: &[(i64, i64)],
    source: (i64, i64),
    reps: u64,
    seed: u64,
    enclosure_radius: f64,
) -> Result<HittingEstimate> {
    if target.is_empty() {
        return Err(Error::config("hitting measure needs a non-empty target"));
    }
    if reps == 0 {
        return Err(Error::config("hitting measure needs reps >= 1"));
    }
    if target.contains(&source) {
        return Err(Error::config("source must lie outside the target"));
    }
    let source_norm = ((source.0 * source.0 + source.1 * source.1) as f64).sqrt();
    if enclosure_radius < 100.0 * source_norm {
        return Err(Error::config(format!(
            "enclosure radius {enclosure_radius} below 100 |x| = {}",
            100.0 * source_norm
        )));
    }
    let ht = HitTarget::new(target);
    let r_sq = (enclosure_radius * enclosure_radius).floor() as i64;
    let n_targets = target.len();

    let (counts, restarts) = (0..reps)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_targets], 0u64),
            |(mut counts, mut restarts), rep| {
                let mut rng = replica_rng(seed, rep);
                let mut bits = BitPairs::new();
                let (mut x, mut y) = source;
                loop {
                    let db = ht.l1_lower_bound(x, y) - 1;
                    let de = {
                        let (ax, ay) = (x.abs(), y.abs());
                        let big = ax.max(ay) as f64;
                        let small = ax.min(ay) as f64;
                        ((r_sq as f64 - small * small).max(0.0).sqrt() - big).floor() as i64 - 1
                    };
                    let m = db.min(de);
                    if m >= JUMP_MIN_HIT {
                        let (dx, dy) = jump_2d(m, &mut rng);
                        x += dx;
                        y += dy;
                        continue;
                    }
                    match bits.next(&mut rng) {
                        0 => x += 1,
                        1 => x -= 1,
                        2 => y += 1,
                        _ => y -= 1,
                    }
                    if ht.contains(x, y) {
                        counts[ht.index[&(x, y)]] += 1;
                        break;
                    }
                    if x * x + y * y >= r_sq {
                        x = source.0;
                        y = source.1;
                        restarts += 1;
                    }
                }
                (counts, restarts)
            },
        )
        .reduce(
            || (vec![0u64; n_targets], 0u64),
            |(mut a, ra), (b, rb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, ra + rb)
            },
        );

    Ok(HittingEstimate {
        target: target.to_vec(),
        source,
        counts,
        reps,
        restarts,
        enclosure_radius,
    })
}

/// Horizontal segment {(j, 0) : |j| <= r}, the standard hitting target.
pub fn segment_target(r: i64) -> Vec<(i64, i64)> {
    (-r..=r).map(|j| (j, 0)).collect()
}

/// Ring system r_k = k^(3 - delta) with widths w_k = k^(2 - delta), grown
/// until the disc of radius `n` is covered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RingSystem {
    pub delta: f64,
    pub radii: Vec<f64>,
}

impl RingSystem {
    pub fn new(n: u32, delta: f64) -> Result<RingSystem> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::config("ring system needs delta in (0, 1)"));
        }
        let mut radii = vec![0.0];
        let mut k = 1u32;
        loop {
            let r = (k as f64).powf(3.0 - delta);
            radii.push(r);
            if r >= n as f64 {
                break;
            }
            k += 1;
        }
        Ok(RingSystem { delta, radii })
    }

    /// w_k = k^(2 - delta).
    pub fn width_scale(&self, k: usize) -> f64 {
        (k as f64).powf(2.0 - self.delta)
    }

    /// Ring index k with r_{k-1} < radius <= r_k.
    pub fn ring_of(&self, radius: f64) -> Option<usize> {
        if radius <= 0.0 {
            return Some(1);
        }
        (1..self.radii.len()).find(|&k| self.radii[k - 1] < radius && radius <= self.radii[k])
    }
}

/// Ring-crossing summary: nu_k is the first particle stuck in ring k,
/// zeta_k = nu_k - nu_{k+1} the particles spent crossing it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RingCross {
    pub k: usize,
    pub nu: u64,
    pub zeta: Option<i64>,
}

pub fn ring_crossing_stats(outcome: &BaOutcome, rings: &RingSystem) -> Result<Vec<RingCross>> {
    match outcome.model {
        GraphModel::Disc2d { .. } => {}
        _ => return Err(Error::config("ring stats expect a disc2d outcome")),
    }
    let r_max = *rings.radii.last().expect("non-empty ring system");
    let mut first: Vec<Option<u64>> = vec![None; rings.radii.len()];
    for ev in &outcome.stick_events {
        let (x, y) = (ev.coords[0], ev.coords[1]);
        let radius = ((x * x + y * y) as f64).sqrt();
        if radius > r_max {
            return Err(Error::config(format!(
                "ring system (r_max = {r_max}) does not cover radius {radius}"
            )));
        }
        if let Some(k) = rings.ring_of(radius) {
            if first[k].is_none() {
                first[k] = Some(ev.n);
            }
        }
    }
    let mut out = Vec::new();
    for k in 1..first.len() {
        if let Some(nu) = first[k] {
            let zeta = first
                .get(k + 1)
                .and_then(|&o| o)
                .map(|outer| nu as i64 - outer as i64);
            out.push(RingCross { k, nu, zeta });
        }
    }
    Ok(out)
}
