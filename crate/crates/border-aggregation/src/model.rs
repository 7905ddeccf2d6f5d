//! Graph families and the reference walk engine.
//!
//! [`run_ba`] runs one full aggregation with literal step-by-step random
//! walks and a hash-set sticky set. It is deliberately naive: every fast
//! engine in the family modules (urn, death coupling, tree path sampling,
//! embedded comb walk, jump-accelerated lattice walks) is validated against
//! the distributions this engine produces.
//!
//! Randomness: a run consumes draws only through `walk_step`, one draw per
//! step, in particle order. Identical `(model, seed)` give identical
//! outcomes.

use std::collections::HashSet;
use std::hash::Hash;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::rng::replica_rng;
use crate::{Error, Result};

/// Largest cube dimension supported by the fixed-size vertex encoding.
pub const MAX_CUBE_DIM: u32 = 8;

/// A graph family instance: topology, origin and initial border.
///
/// * `Star`: `arms` segments of interior length `arm_len` glued at the
///   origin; the far endpoint of each segment is the border.
/// * `Tree`: regular `branching`-ary tree truncated at `depth`; the walk
///   moves only away from the root; the deepest level is the border.
/// * `Box2d`: `[-n..n]^2` with the box walls as border.
/// * `Disc2d`: same box, border where `sqrt(x^2+y^2) >= n-1` (the box
///   corners outside the circle are border too; they are unreachable before
///   the circle points).
/// * `Comb`: `Z^2` with horizontal edges only on the x-axis; border at
///   `|y| = n`. Infinite in x.
/// * `Cube`: `[-n..n]^d`, `d >= 3`, border where the Euclidean norm is
///   `>= n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphModel {
    Star { arm_len: u32, arms: u32 },
    Tree { branching: u32, depth: u32 },
    Box2d { n: u32 },
    Disc2d { n: u32 },
    Comb { n: u32 },
    Cube { d: u32, n: u32 },
}

impl GraphModel {
    pub fn family(&self) -> &'static str {
        match self {
            GraphModel::Star { .. } => "star",
            GraphModel::Tree { .. } => "tree",
            GraphModel::Box2d { .. } => "box2d",
            GraphModel::Disc2d { .. } => "disc2d",
            GraphModel::Comb { .. } => "comb",
            GraphModel::Cube { .. } => "cube",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GraphModel::Star { arm_len, arms } => {
                if arms < 2 {
                    return Err(Error::config(format!("star needs K >= 2 arms, got {arms}")));
                }
                if arm_len < 1 {
                    return Err(Error::config("star needs arm length N >= 1"));
                }
            }
            GraphModel::Tree { branching, depth } => {
                if branching < 2 {
                    return Err(Error::config(format!(
                        "tree needs branching d >= 2, got {branching}"
                    )));
                }
                if depth < 1 {
                    return Err(Error::config("tree needs depth K >= 1"));
                }
                if (depth as f64) * (branching as f64).log2() > 62.0 {
                    return Err(Error::guard(format!(
                        "tree with d={branching}, K={depth} exceeds the vertex index range"
                    )));
                }
            }
            GraphModel::Box2d { n } | GraphModel::Disc2d { n } | GraphModel::Comb { n } => {
                if n < 2 {
                    return Err(Error::config(format!(
                        "{} needs N >= 2, got {n}",
                        self.family()
                    )));
                }
            }
            GraphModel::Cube { d, n } => {
                if d == 2 {
                    return Err(Error::config(
                        "cube with d = 2: use box2d or disc2d for the planar models",
                    ));
                }
                if d < 3 {
                    return Err(Error::config(format!("cube needs d >= 3, got {d}")));
                }
                if d > MAX_CUBE_DIM {
                    return Err(Error::guard(format!(
                        "cube dimension {d} exceeds supported maximum {MAX_CUBE_DIM}"
                    )));
                }
                if n < 2 {
                    return Err(Error::config(format!("cube needs N >= 2, got {n}")));
                }
            }
        }
        Ok(())
    }

    /// |G|, when finite. The comb is infinite in x.
    pub fn vertex_count(&self) -> Option<u64> {
        match *self {
            GraphModel::Star { arm_len, arms } => {
                Some(1 + arms as u64 * (arm_len as u64 + 1))
            }
            GraphModel::Tree { branching, depth } => {
                let d = branching as u128;
                let mut total: u128 = 0;
                let mut level: u128 = 1;
                for _ in 0..=depth {
                    total += level;
                    level *= d;
                }
                u64::try_from(total).ok()
            }
            GraphModel::Box2d { n } | GraphModel::Disc2d { n } => {
                let side = 2 * n as u64 + 1;
                Some(side * side)
            }
            GraphModel::Comb { .. } => None,
            GraphModel::Cube { d, n } => {
                let side = 2 * n as u128 + 1;
                let mut total: u128 = 1;
                for _ in 0..d {
                    total *= side;
                }
                u64::try_from(total).ok()
            }
        }
    }

    /// |B|, when finite.
    pub fn border_count(&self) -> Option<u64> {
        match *self {
            GraphModel::Star { arms, .. } => Some(arms as u64),
            GraphModel::Tree { branching, depth } => {
                Some((branching as u64).pow(depth))
            }
            GraphModel::Box2d { n } => Some(8 * n as u64),
            GraphModel::Disc2d { n } => {
                let n = n as i64;
                let thr = (n - 1) * (n - 1);
                let mut count = 0u64;
                for x in -n..=n {
                    for y in -n..=n {
                        if x * x + y * y >= thr {
                            count += 1;
                        }
                    }
                }
                Some(count)
            }
            GraphModel::Comb { .. } => None,
            GraphModel::Cube { d, n } => {
                // Count grid points with squared norm >= (n-1)^2 by a
                // radial convolution over per-axis squared coordinates.
                let n = n as i64;
                let thr = (n - 1) * (n - 1);
                let max_sq = (d as i64) * n * n;
                // counts[s] = number of d-tuples with squared norm s.
                let mut counts = vec![0u64; max_sq as usize + 1];
                counts[0] = 1;
                let mut cur_max = 0usize;
                for _ in 0..d {
                    let mut next = vec![0u64; max_sq as usize + 1];
                    for s in 0..=cur_max {
                        if counts[s] == 0 {
                            continue;
                        }
                        for x in -n..=n {
                            next[s + (x * x) as usize] += counts[s];
                        }
                    }
                    cur_max += (n * n) as usize;
                    counts = next;
                }
                Some(counts[thr as usize..].iter().sum())
            }
        }
    }

    /// Graph distance from the origin to the border.
    pub fn origin_border_distance(&self) -> u64 {
        match *self {
            GraphModel::Star { arm_len, .. } => arm_len as u64 + 1,
            GraphModel::Tree { depth, .. } => depth as u64,
            GraphModel::Box2d { n } => n as u64,
            GraphModel::Disc2d { n } | GraphModel::Cube { n, .. } => n as u64 - 1,
            GraphModel::Comb { n } => n as u64,
        }
    }

    /// |G| - |B|: the universal upper bound for xi. None when infinite.
    pub fn xi_upper_bound(&self) -> Option<u64> {
        Some(self.vertex_count()? - self.border_count()?)
    }
}

/// One stick event: particle `n` stopped at the vertex with these
/// family-specific integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StickEvent {
    pub n: u64,
    pub coords: Vec<i64>,
}

/// The raw result of one aggregation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaOutcome {
    pub model: GraphModel,
    /// Total particles emitted, including the final one at the origin.
    pub xi: u64,
    /// Ordered by particle index; the last event is at the origin.
    pub stick_events: Vec<StickEvent>,
}

impl BaOutcome {
    /// Checks the universal inequality dist(v0, B) <= xi <= |G| - |B|.
    pub fn xi_within_bounds(&self) -> bool {
        let lower = self.model.origin_border_distance();
        let upper = self.model.xi_upper_bound();
        self.xi >= lower && upper.map_or(true, |u| self.xi <= u)
    }
}

/// Geometry contract each family implements for the reference engine.
pub trait Topology {
    type Vertex: Copy + Eq + Hash + std::fmt::Debug;

    fn model(&self) -> GraphModel;
    fn origin(&self) -> Self::Vertex;
    fn is_border(&self, v: Self::Vertex) -> bool;
    /// All graph neighbors of `v` (used for adjacency checks, not for
    /// stepping).
    fn neighbors(&self, v: Self::Vertex, out: &mut Vec<Self::Vertex>);
    /// One step of the family's walk law.
    fn walk_step<R: Rng>(&self, v: Self::Vertex, rng: &mut R) -> Self::Vertex;
    fn coords(&self, v: Self::Vertex) -> Vec<i64>;
    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex>;
    fn coord_names(&self) -> Vec<&'static str>;
}

/// Star: vertex = (arm, depth), origin canonicalized to (0, 0).
pub struct StarTopology {
    pub arm_len: u32,
    pub arms: u32,
}

impl Topology for StarTopology {
    type Vertex = (u32, u32);

    fn model(&self) -> GraphModel {
        GraphModel::Star {
            arm_len: self.arm_len,
            arms: self.arms,
        }
    }

    fn origin(&self) -> Self::Vertex {
        (0, 0)
    }

    fn is_border(&self, (_, depth): Self::Vertex) -> bool {
        depth == self.arm_len + 1
    }

    fn neighbors(&self, (arm, depth): Self::Vertex, out: &mut Vec<Self::Vertex>) {
        out.clear();
        if depth == 0 {
            for a in 0..self.arms {
                out.push((a, 1));
            }
        } else {
            out.push(if depth == 1 { (0, 0) } else { (arm, depth - 1) });
            if depth + 1 <= self.arm_len + 1 {
                out.push((arm, depth + 1));
            }
        }
    }

    fn walk_step<R: Rng>(&self, (arm, depth): Self::Vertex, rng: &mut R) -> Self::Vertex {
        if depth == 0 {
            (rng.random_range(0..self.arms), 1)
        } else if rng.random_range(0..2u32) == 0 {
            if depth == 1 {
                (0, 0)
            } else {
                (arm, depth - 1)
            }
        } else {
            (arm, depth + 1)
        }
    }

    fn coords(&self, (arm, depth): Self::Vertex) -> Vec<i64> {
        vec![arm as i64, depth as i64]
    }

    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex> {
        match coords {
            &[arm, depth]
                if (0..self.arms as i64).contains(&arm)
                    && (0..=self.arm_len as i64 + 1).contains(&depth) =>
            {
                if depth == 0 {
                    Some((0, 0))
                } else {
                    Some((arm as u32, depth as u32))
                }
            }
            _ => None,
        }
    }

    fn coord_names(&self) -> Vec<&'static str> {
        vec!["arm", "depth"]
    }
}

/// Regular tree: vertex = (level, breadth-first index within level).
pub struct TreeTopology {
    pub branching: u32,
    pub depth: u32,
}

impl Topology for TreeTopology {
    type Vertex = (u32, u64);

    fn model(&self) -> GraphModel {
        GraphModel::Tree {
            branching: self.branching,
            depth: self.depth,
        }
    }

    fn origin(&self) -> Self::Vertex {
        (0, 0)
    }

    fn is_border(&self, (level, _): Self::Vertex) -> bool {
        level == self.depth
    }

    fn neighbors(&self, (level, idx): Self::Vertex, out: &mut Vec<Self::Vertex>) {
        out.clear();
        if level > 0 {
            out.push((level - 1, idx / self.branching as u64));
        }
        if level < self.depth {
            for c in 0..self.branching as u64 {
                out.push((level + 1, idx * self.branching as u64 + c));
            }
        }
    }

    fn walk_step<R: Rng>(&self, (level, idx): Self::Vertex, rng: &mut R) -> Self::Vertex {
        // Upward-only walk law.
        let c = rng.random_range(0..self.branching) as u64;
        (level + 1, idx * self.branching as u64 + c)
    }

    fn coords(&self, (level, idx): Self::Vertex) -> Vec<i64> {
        vec![level as i64, idx as i64]
    }

    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex> {
        match coords {
            &[level, idx] if (0..=self.depth as i64).contains(&level) && idx >= 0 => {
                let width = (self.branching as u64).checked_pow(level as u32)?;
                if (idx as u64) < width {
                    Some((level as u32, idx as u64))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn coord_names(&self) -> Vec<&'static str> {
        vec!["level", "index"]
    }
}

/// Box or disc border on `[-n..n]^2`.
pub struct Lattice2dTopology {
    pub n: u32,
    pub disc: bool,
}

impl Lattice2dTopology {
    fn inside(&self, (x, y): (i32, i32)) -> bool {
        let n = self.n as i32;
        x.abs() <= n && y.abs() <= n
    }
}

impl Topology for Lattice2dTopology {
    type Vertex = (i32, i32);

    fn model(&self) -> GraphModel {
        if self.disc {
            GraphModel::Disc2d { n: self.n }
        } else {
            GraphModel::Box2d { n: self.n }
        }
    }

    fn origin(&self) -> Self::Vertex {
        (0, 0)
    }

    fn is_border(&self, (x, y): Self::Vertex) -> bool {
        let n = self.n as i64;
        if self.disc {
            (x as i64) * (x as i64) + (y as i64) * (y as i64) >= (n - 1) * (n - 1)
        } else {
            x.abs() as i64 == n || y.abs() as i64 == n
        }
    }

    fn neighbors(&self, (x, y): Self::Vertex, out: &mut Vec<Self::Vertex>) {
        out.clear();
        for v in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if self.inside(v) {
                out.push(v);
            }
        }
    }

    fn walk_step<R: Rng>(&self, (x, y): Self::Vertex, rng: &mut R) -> Self::Vertex {
        match rng.random_range(0..4u32) {
            0 => (x + 1, y),
            1 => (x - 1, y),
            2 => (x, y + 1),
            _ => (x, y - 1),
        }
    }

    fn coords(&self, (x, y): Self::Vertex) -> Vec<i64> {
        vec![x as i64, y as i64]
    }

    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex> {
        match coords {
            &[x, y] => {
                let v = (i32::try_from(x).ok()?, i32::try_from(y).ok()?);
                self.inside(v).then_some(v)
            }
            _ => None,
        }
    }

    fn coord_names(&self) -> Vec<&'static str> {
        vec!["x", "y"]
    }
}

/// Comb lattice: teeth at every x, axis edges only at y = 0.
pub struct CombTopology {
    pub n: u32,
}

impl Topology for CombTopology {
    type Vertex = (i64, i32);

    fn model(&self) -> GraphModel {
        GraphModel::Comb { n: self.n }
    }

    fn origin(&self) -> Self::Vertex {
        (0, 0)
    }

    fn is_border(&self, (_, y): Self::Vertex) -> bool {
        y.unsigned_abs() == self.n
    }

    fn neighbors(&self, (x, y): Self::Vertex, out: &mut Vec<Self::Vertex>) {
        out.clear();
        if y == 0 {
            out.push((x + 1, 0));
            out.push((x - 1, 0));
            out.push((x, 1));
            out.push((x, -1));
        } else {
            if y.unsigned_abs() < self.n {
                out.push((x, y + y.signum()));
            }
            out.push((x, y - y.signum()));
        }
    }

    fn walk_step<R: Rng>(&self, (x, y): Self::Vertex, rng: &mut R) -> Self::Vertex {
        if y == 0 {
            match rng.random_range(0..4u32) {
                0 => (x + 1, 0),
                1 => (x - 1, 0),
                2 => (x, 1),
                _ => (x, -1),
            }
        } else if rng.random_range(0..2u32) == 0 {
            (x, y + 1)
        } else {
            (x, y - 1)
        }
    }

    fn coords(&self, (x, y): Self::Vertex) -> Vec<i64> {
        vec![x, y as i64]
    }

    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex> {
        match coords {
            &[x, y] => {
                let y = i32::try_from(y).ok()?;
                (y.unsigned_abs() <= self.n).then_some((x, y))
            }
            _ => None,
        }
    }

    fn coord_names(&self) -> Vec<&'static str> {
        vec!["x", "y"]
    }
}

/// d-dimensional cube with Euclidean-norm border, d <= MAX_CUBE_DIM.
pub struct CubeTopology {
    pub d: u32,
    pub n: u32,
}

impl CubeTopology {
    fn inside(&self, v: [i32; MAX_CUBE_DIM as usize]) -> bool {
        v.iter()
            .take(self.d as usize)
            .all(|&x| x.unsigned_abs() <= self.n)
    }

    fn norm_sq(&self, v: [i32; MAX_CUBE_DIM as usize]) -> i64 {
        v.iter()
            .take(self.d as usize)
            .map(|&x| (x as i64) * (x as i64))
            .sum()
    }
}

impl Topology for CubeTopology {
    type Vertex = [i32; MAX_CUBE_DIM as usize];

    fn model(&self) -> GraphModel {
        GraphModel::Cube {
            d: self.d,
            n: self.n,
        }
    }

    fn origin(&self) -> Self::Vertex {
        [0; MAX_CUBE_DIM as usize]
    }

    fn is_border(&self, v: Self::Vertex) -> bool {
        let n = self.n as i64;
        self.norm_sq(v) >= (n - 1) * (n - 1)
    }

    fn neighbors(&self, v: Self::Vertex, out: &mut Vec<Self::Vertex>) {
        out.clear();
        for axis in 0..self.d as usize {
            for sign in [1, -1] {
                let mut w = v;
                w[axis] += sign;
                if self.inside(w) {
                    out.push(w);
                }
            }
        }
    }

    fn walk_step<R: Rng>(&self, v: Self::Vertex, rng: &mut R) -> Self::Vertex {
        let dir = rng.random_range(0..2 * self.d);
        let mut w = v;
        w[(dir >> 1) as usize] += if dir & 1 == 0 { 1 } else { -1 };
        w
    }

    fn coords(&self, v: Self::Vertex) -> Vec<i64> {
        v.iter().take(self.d as usize).map(|&x| x as i64).collect()
    }

    fn vertex_from_coords(&self, coords: &[i64]) -> Option<Self::Vertex> {
        if coords.len() != self.d as usize {
            return None;
        }
        let mut v = [0i32; MAX_CUBE_DIM as usize];
        for (slot, &c) in v.iter_mut().zip(coords) {
            *slot = i32::try_from(c).ok()?;
        }
        self.inside(v).then_some(v)
    }

    fn coord_names(&self) -> Vec<&'static str> {
        const NAMES: [&str; MAX_CUBE_DIM as usize] =
            ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
        NAMES[..self.d as usize].to_vec()
    }
}

/// Runs one full aggregation with the reference engine.
pub fn run_ba(model: &GraphModel, seed: u64) -> Result<BaOutcome> {
    run_ba_stream(model, seed, 0)
}

/// Reference engine on replica stream `stream` of `seed`.
pub fn run_ba_stream(model: &GraphModel, seed: u64, stream: u64) -> Result<BaOutcome> {
    model.validate()?;
    match *model {
        GraphModel::Star { arm_len, arms } => {
            run_generic(&StarTopology { arm_len, arms }, seed, stream)
        }
        GraphModel::Tree { branching, depth } => {
            run_generic(&TreeTopology { branching, depth }, seed, stream)
        }
        GraphModel::Box2d { n } => run_generic(&Lattice2dTopology { n, disc: false }, seed, stream),
        GraphModel::Disc2d { n } => run_generic(&Lattice2dTopology { n, disc: true }, seed, stream),
        GraphModel::Comb { n } => run_generic(&CombTopology { n }, seed, stream),
        GraphModel::Cube { d, n } => run_generic(&CubeTopology { d, n }, seed, stream),
    }
}

fn run_generic<T: Topology>(topo: &T, seed: u64, stream: u64) -> Result<BaOutcome> {
    let mut rng = replica_rng(seed, stream);
    let origin = topo.origin();
    // Sticky set = implicit border plus vertices stuck so far.
    let mut stuck: HashSet<T::Vertex> = HashSet::new();
    let mut events = Vec::new();
    let mut nbrs = Vec::new();

    let adjacent = |stuck: &HashSet<T::Vertex>, nbrs: &mut Vec<T::Vertex>, v: T::Vertex| {
        topo.neighbors(v, nbrs);
        nbrs.iter().any(|&u| topo.is_border(u) || stuck.contains(&u))
    };

    let mut n: u64 = 0;
    loop {
        n += 1;
        let mut pos = origin;
        loop {
            if adjacent(&stuck, &mut nbrs, pos) {
                stuck.insert(pos);
                events.push(StickEvent {
                    n,
                    coords: topo.coords(pos),
                });
                break;
            }
            pos = topo.walk_step(pos, &mut rng);
        }
        if pos == origin {
            break;
        }
    }

    Ok(BaOutcome {
        model: topo.model(),
        xi: n,
        stick_events: events,
    })
}

/// Post-hoc consistency check of a finished run. Replays the stick order
/// and verifies: events are 1..=xi in order, no vertex sticks twice, no
/// border vertex sticks, every vertex was adjacent to the sticky set of its
/// time, the last event is at the origin, and xi respects the universal
/// bounds.
pub fn verify_outcome(outcome: &BaOutcome) -> Result<()> {
    outcome.model.validate()?;
    match outcome.model {
        GraphModel::Star { arm_len, arms } => {
            verify_generic(&StarTopology { arm_len, arms }, outcome)
        }
        GraphModel::Tree { branching, depth } => {
            verify_generic(&TreeTopology { branching, depth }, outcome)
        }
        GraphModel::Box2d { n } => verify_generic(&Lattice2dTopology { n, disc: false }, outcome),
        GraphModel::Disc2d { n } => verify_generic(&Lattice2dTopology { n, disc: true }, outcome),
        GraphModel::Comb { n } => verify_generic(&CombTopology { n }, outcome),
        GraphModel::Cube { d, n } => verify_generic(&CubeTopology { d, n }, outcome),
    }
}

fn verify_generic<T: Topology>(topo: &T, outcome: &BaOutcome) -> Result<()> {
    let fail = |msg: String| Err(Error::Parse(msg));
    if outcome.xi as usize != outcome.stick_events.len() {
        return fail(format!(
            "xi = {} but {} stick events",
            outcome.xi,
            outcome.stick_events.len()
        ));
    }
    if !outcome.xi_within_bounds() {
        return fail(format!(
            "xi = {} outside [{}, {:?}]",
            outcome.xi,
            outcome.model.origin_border_distance(),
            outcome.model.xi_upper_bound()
        ));
    }
    let mut stuck: HashSet<T::Vertex> = HashSet::new();
    let mut nbrs = Vec::new();
    for (i, ev) in outcome.stick_events.iter().enumerate() {
        if ev.n != i as u64 + 1 {
            return fail(format!("event {} has particle index {}", i, ev.n));
        }
        let v = match topo.vertex_from_coords(&ev.coords) {
            Some(v) => v,
            None => return fail(format!("event {} has invalid coords {:?}", i, ev.coords)),
        };
        if topo.is_border(v) {
            return fail(format!("particle {} stuck on a border vertex", ev.n));
        }
        if stuck.contains(&v) {
            return fail(format!("vertex {:?} stuck twice", v));
        }
        topo.neighbors(v, &mut nbrs);
        let adj = nbrs.iter().any(|&u| topo.is_border(u) || stuck.contains(&u));
        if !adj {
            return fail(format!(
                "particle {} stuck at {:?} without a sticky neighbor",
                ev.n, v
            ));
        }
        let is_last = i + 1 == outcome.stick_events.len();
        if (v == topo.origin()) != is_last {
            return fail(format!(
                "origin stick must be exactly the final event (event {})",
                ev.n
            ));
        }
        stuck.insert(v);
    }
    Ok(())
}
