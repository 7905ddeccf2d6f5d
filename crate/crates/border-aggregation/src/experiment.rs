//! Replica fan-out, sweep experiments and run metadata.
//!
//! Replica r of a sweep point p draws from stream `p * reps + r` of the
//! root seed, so results are independent of thread count and schedule.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_scaling, SampleStats, ScalingFit};
use crate::comb::{simulate_comb_embedded, CombEngine};
use crate::lattice::{simulate_from_base_with, LatticeBase, LatticeKind};
use crate::model::{run_ba_stream, GraphModel};
use crate::rng::{replica_rng, ReplicaRng, GENERATOR_ID};
use crate::star::{simulate_death_coupling_with, simulate_urn_with, StarRunResult};
use crate::{Error, Result};

/// Runs `reps` independent replicas in parallel, each on its own stream;
/// results come back in replica order.
pub fn par_replicas<T, F>(reps: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ReplicaRng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            f(r, &mut rng)
        })
        .collect()
}

/// Like [`par_replicas`], with streams offset by `stream_base` (used by
/// sweeps so each point gets a disjoint stream block).
pub fn par_replicas_offset<T, F>(reps: u64, seed: u64, stream_base: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ReplicaRng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, stream_base + r);
            f(r, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarEngine {
    Walk,
    Urn,
    Death,
}

/// One star replica on the requested engine.
pub fn star_replica(
    engine: StarEngine,
    n: u32,
    k: u32,
    seed: u64,
    stream: u64,
) -> Result<StarRunResult> {
    match engine {
        StarEngine::Urn => simulate_urn_with(n, k, &mut replica_rng(seed, stream)),
        StarEngine::Death => simulate_death_coupling_with(n, k, &mut replica_rng(seed, stream)),
        StarEngine::Walk => crate::star::simulate_star_walk_stream(n, k, seed, stream),
    }
}

/// Per-point mean statistics of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: u32,
    pub reps: u64,
    pub mean: f64,
    pub stats: SampleStats,
}

/// Mean survivor count of the star via the death engine over several N.
pub fn star_survivor_sweep(
    k: u32,
    n_list: &[u32],
    reps: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for (pi, &n) in n_list.iter().enumerate() {
        let samples = par_replicas_offset(reps, seed, pi as u64 * reps, |_, rng| {
            simulate_death_coupling_with(n, k, rng).map(|r| r.survivors as i64)
        });
        let mut stats = SampleStats::new();
        for s in samples {
            stats.push(s?);
        }
        points.push(SweepPoint {
            n,
            reps,
            mean: stats.mean(),
            stats,
        });
    }
    Ok(points)
}

/// Mean xi over several lattice sizes.
pub fn lattice_xi_sweep(
    kind: LatticeKind,
    d: u32,
    n_list: &[u32],
    reps: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for (pi, &n) in n_list.iter().enumerate() {
        let model = crate::lattice::build_lattice_model(kind, d, n)?;
        let base = LatticeBase::new(&model)?;
        let samples = par_replicas_offset(reps, seed, pi as u64 * reps, |_, rng| {
            simulate_from_base_with(&base, rng, None).map(|o| o.xi as i64)
        });
        let mut stats = SampleStats::new();
        for s in samples {
            stats.push(s?);
        }
        points.push(SweepPoint {
            n,
            reps,
            mean: stats.mean(),
            stats,
        });
    }
    Ok(points)
}

/// Mean xi over several comb heights.
pub fn comb_xi_sweep(
    engine: CombEngine,
    n_list: &[u32],
    reps: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::new();
    for (pi, &n) in n_list.iter().enumerate() {
        let samples = par_replicas_offset(reps, seed, pi as u64 * reps, |r, rng| match engine {
            CombEngine::Embedded => simulate_comb_embedded(n, rng).map(|(o, _)| o.xi as i64),
            CombEngine::Literal => {
                run_ba_stream(&GraphModel::Comb { n }, seed, pi as u64 * reps + r)
                    .map(|o| o.xi as i64)
            }
        });
        let mut stats = SampleStats::new();
        for s in samples {
            stats.push(s?);
        }
        points.push(SweepPoint {
            n,
            reps,
            mean: stats.mean(),
            stats,
        });
    }
    Ok(points)
}

/// Log-log fit of sweep means against N.
pub fn fit_sweep(points: &[SweepPoint]) -> Result<ScalingFit> {
    let data: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.mean)).collect();
    fit_scaling(&data)
}

/// Metadata record written next to every CLI data file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub generator: String,
    pub seed: u64,
    pub replicas: u64,
    pub threads: usize,
    pub wall_time_secs: f64,
    /// Effective configuration after defaults, config file and flags.
    pub effective_config: serde_json::Value,
    /// Built-in defaults for the command.
    pub defaults: serde_json::Value,
    /// Raw config-file section, if a config file was given.
    pub config_file: Option<serde_json::Value>,
    /// Flags the user passed explicitly.
    pub flags: serde_json::Value,
}

impl RunMetadata {
    pub fn new(seed: u64, replicas: u64) -> RunMetadata {
        RunMetadata {
            generator: GENERATOR_ID.to_string(),
            seed,
            replicas,
            threads: rayon::current_num_threads(),
            wall_time_secs: 0.0,
            effective_config: serde_json::Value::Null,
            defaults: serde_json::Value::Null,
            config_file: None,
            flags: serde_json::Value::Null,
        }
    }
}

/// Times a closure and stores the wall time in the metadata.
pub fn timed<T>(meta: &mut RunMetadata, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    meta.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Parses a comma-separated list of positive integers.
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    let list: std::result::Result<Vec<u32>, _> =
        s.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let list = list.map_err(|e| Error::config(format!("bad size list '{s}': {e}")))?;
    if list.is_empty() {
        return Err(Error::config("empty size list"));
    }
    Ok(list)
}
