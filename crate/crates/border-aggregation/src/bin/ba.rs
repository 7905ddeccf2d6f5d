//! Experiment runner for the border aggregation toolkit.
//!
//! Thin binary: argument parsing, config-file overlay and file output live
//! here; all science is in the library. Every command writes a data stream
//! (CSV unless noted) plus a metadata record carrying the seed, generator
//! id, thread count, wall time and the resolved configuration. Exit codes:
//! 0 success, 2 configuration error, 3 guard violation (state-space caps).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use border_aggregation::analysis::{fit_scaling, tv_distance};
use border_aggregation::comb::{CombEngine, CombState};
use border_aggregation::experiment::{
    comb_xi_sweep, fit_sweep, lattice_xi_sweep, par_replicas, parse_u32_list, star_replica,
    star_survivor_sweep, RunMetadata, StarEngine, SweepPoint,
};
use border_aggregation::lattice::{
    build_lattice_model, estimate_hitting_measure, ring_crossing_stats, segment_target,
    LatticeBase, LatticeKind, RingSystem,
};
use border_aggregation::model::GraphModel;
use border_aggregation::snapshot::{export_snapshot, SnapshotFormat};
use border_aggregation::star::{
    exact_star_pmf, limit_cdf_g, limit_density_f_zeta, xi_pmf_from_survivors, LimitLawSpec,
};
use border_aggregation::tree::{birthday_tail, xi_tree_exact};
use border_aggregation::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ba",
    about = "Border aggregation model: simulation and exact computation",
    version
)]
struct Cli {
    /// TOML config file; flags override file values, file values override
    /// defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replica fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Family,
}

#[derive(Subcommand)]
enum Family {
    /// Star graph: urn, death-coupling and literal engines, limit laws.
    Star {
        #[command(subcommand)]
        op: StarOp,
    },
    /// Regular trees: exact recursion, simulation, birthday counts.
    Tree {
        #[command(subcommand)]
        op: TreeOp,
    },
    /// Z^2 and Z^d lattices: aggregation, hitting measure, ring stats.
    Lattice {
        #[command(subcommand)]
        op: LatticeOp,
    },
    /// Comb lattice aggregation.
    Comb {
        #[command(subcommand)]
        op: CombOp,
    },
    /// Scaling fits and distribution comparison.
    Analyze {
        #[command(subcommand)]
        op: AnalyzeOp,
    },
}

#[derive(ValueEnum, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StarEngineArg {
    Walk,
    Urn,
    Death,
}

impl From<StarEngineArg> for StarEngine {
    fn from(e: StarEngineArg) -> Self {
        match e {
            StarEngineArg::Walk => StarEngine::Walk,
            StarEngineArg::Urn => StarEngine::Urn,
            StarEngineArg::Death => StarEngine::Death,
        }
    }
}

#[derive(Args, Serialize)]
struct OutArg {
    /// Output file (default: stdout). Metadata goes to `<out>.meta.json`,
    /// or stderr when writing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StarOp {
    /// Replicated star runs; with --n-list, a survivor-scaling sweep.
    Simulate {
        #[arg(long, value_enum)]
        engine: Option<StarEngineArg>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated N values: emit per-N mean survivors instead of
        /// per-replica rows.
        #[arg(long)]
        n_list: Option<String>,
        /// With --n-list: print the log-log fit JSON to stderr.
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact survivor/xi distribution (small N, K).
    Exact {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Standardized arm-lifetime samples (tau - N^2/2) / (N^1.5 / sqrt 3),
    /// with the KS distance to the normal law and the Berry-Esseen bound in
    /// the metadata.
    Tau {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Limit-law quadrature along the diagonal a*(1,..,1).
    LimitLaw {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        a_max: Option<f64>,
        #[arg(long)]
        points: Option<u32>,
        #[arg(long)]
        half_nodes: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum TreeOp {
    /// Exact xi pmf on the binary tree: CSV k,numerator,denominator.
    Exact {
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Replicated d-ary tree runs.
    Simulate {
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit an xi,count histogram instead of per-replica rows.
        #[arg(long)]
        histogram: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generalized birthday counts zeta_{K,m} over A outcomes.
    Birthday {
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LatticeKindArg {
    Box,
    Disc,
    Cube,
}

impl From<LatticeKindArg> for LatticeKind {
    fn from(k: LatticeKindArg) -> Self {
        match k {
            LatticeKindArg::Box => LatticeKind::Box2d,
            LatticeKindArg::Disc => LatticeKind::Disc2d,
            LatticeKindArg::Cube => LatticeKind::Cube,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum HitShapeArg {
    /// Single point at the origin.
    Origin,
    /// Four neighbors of the origin.
    Plus,
    /// Horizontal segment {(j,0): |j| <= r}.
    Segment,
}

#[derive(Subcommand)]
enum LatticeOp {
    /// Replicated lattice runs; with --n-list, an exponent sweep.
    Simulate {
        #[arg(long, value_enum)]
        kind: Option<LatticeKindArg>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Snapshot file for the last replica (CSV; .json for JSON).
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Emit an xi,count histogram instead of per-replica rows.
        #[arg(long)]
        histogram: bool,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// First-hit distribution over a small target set.
    Hitmeasure {
        #[arg(long, value_enum)]
        shape: Option<HitShapeArg>,
        /// Segment radius (shape = segment).
        #[arg(long)]
        r: Option<i64>,
        /// Source point "x,y".
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Enclosure radius as a multiple of |x| (>= 100).
        #[arg(long)]
        enclosure_factor: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Ring-crossing statistics of disc runs.
    Rings {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CombEngineArg {
    Literal,
    Embedded,
}

impl From<CombEngineArg> for CombEngine {
    fn from(e: CombEngineArg) -> Self {
        match e {
            CombEngineArg::Literal => CombEngine::Literal,
            CombEngineArg::Embedded => CombEngine::Embedded,
        }
    }
}

#[derive(Subcommand)]
enum CombOp {
    /// Replicated comb runs; with --n-list, an exponent sweep.
    Simulate {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        engine: Option<CombEngineArg>,
        /// Frontier snapshot of the last replica: CSV j,h_plus,h_minus.
        #[arg(long)]
        frontiers: Option<PathBuf>,
        /// Emit an xi,count histogram instead of per-replica rows.
        #[arg(long)]
        histogram: bool,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum AnalyzeOp {
    /// Least-squares power-law fit of CSV (x,y) points; JSON result.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Total variation distance between two distribution CSVs.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return report(e),
    };
    let result = match cli.command {
        Family::Star { op } => run_star(op, &config),
        Family::Tree { op } => run_tree(op, &config),
        Family::Lattice { op } => run_lattice(op, &config),
        Family::Comb { op } => run_comb(op, &config),
        Family::Analyze { op } => run_analyze(op, &config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
        Error::Guard(_) => ExitCode::from(3),
        Error::Io(_) => ExitCode::from(1),
    }
}

fn load_config(path: Option<&Path>) -> Result<toml::Table> {
    match path {
        None => Ok(toml::Table::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::config(format!("config file: {e}")))
        }
    }
}

/// Looks up `section.key` in the config file; the section may be dotted
/// (`tree.simulate` resolves nested tables).
fn cfg_get<T: serde::de::DeserializeOwned>(
    config: &toml::Table,
    section: &str,
    key: &str,
) -> Option<T> {
    let mut parts = section.split('.');
    let mut node = config.get(parts.next()?)?;
    for part in parts {
        node = node.get(part)?;
    }
    node.get(key).and_then(|v| v.clone().try_into().ok())
}

fn cfg_section(config: &toml::Table, section: &str) -> serde_json::Value {
    config
        .get(section)
        .map(|v| serde_json::to_value(v).unwrap_or(serde_json::Value::Null))
        .unwrap_or(serde_json::Value::Null)
}

/// Resolves one parameter: explicit flag, then config file, then default.
fn resolve<T: serde::de::DeserializeOwned>(
    flag: Option<T>,
    config: &toml::Table,
    section: &str,
    key: &str,
    default: T,
) -> T {
    flag.or_else(|| cfg_get(config, section, key)).unwrap_or(default)
}

struct Output {
    data: Vec<u8>,
    meta: RunMetadata,
    out: Option<PathBuf>,
}

fn emit(output: Output) -> Result<()> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, &output.data)?;
            let meta_path = path.with_extension(format!(
                "{}meta.json",
                path.extension()
                    .map(|e| format!("{}.", e.to_string_lossy()))
                    .unwrap_or_default()
            ));
            let mut meta = serde_json::to_vec_pretty(&output.meta)
                .map_err(|e| Error::Parse(e.to_string()))?;
            meta.push(b'\n');
            std::fs::write(meta_path, meta)?;
        }
        None => {
            std::io::stdout().write_all(&output.data)?;
            eprintln!(
                "{}",
                serde_json::to_string(&output.meta).map_err(|e| Error::Parse(e.to_string()))?
            );
        }
    }
    Ok(())
}

fn meta_with_config<C: Serialize, D: Serialize, F: Serialize>(
    mut meta: RunMetadata,
    config: &toml::Table,
    section: &str,
    effective: &C,
    defaults: &D,
    flags: &F,
) -> RunMetadata {
    meta.effective_config = serde_json::to_value(effective).unwrap_or(serde_json::Value::Null);
    meta.defaults = serde_json::to_value(defaults).unwrap_or(serde_json::Value::Null);
    let section = cfg_section(config, section);
    meta.config_file = if section.is_null() { None } else { Some(section) };
    meta.flags = serde_json::to_value(flags).unwrap_or(serde_json::Value::Null);
    meta
}

fn replica_csv(values: &[u64], histogram: bool) -> String {
    if histogram {
        let mut hist: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        for &v in values {
            *hist.entry(v).or_insert(0) += 1;
        }
        let mut csv = String::from("xi,count\n");
        for (v, c) in hist {
            csv.push_str(&format!("{v},{c}\n"));
        }
        csv
    } else {
        let mut csv = String::from("replica,xi\n");
        for (r, v) in values.iter().enumerate() {
            csv.push_str(&format!("{r},{v}\n"));
        }
        csv
    }
}

fn sweep_csv(points: &[SweepPoint], value_name: &str) -> String {
    let mut csv = format!("n,reps,mean_{value_name}\n");
    for p in points {
        csv.push_str(&format!("{},{},{}\n", p.n, p.reps, p.mean));
    }
    csv
}

fn print_fit(points: &[SweepPoint]) -> Result<()> {
    let fit = fit_sweep(points)?;
    eprintln!(
        "{}",
        serde_json::to_string(&fit).map_err(|e| Error::Parse(e.to_string()))?
    );
    Ok(())
}

#[derive(Serialize)]
struct StarSimulateCfg {
    engine: StarEngineArg,
    n: u32,
    k: u32,
    reps: u64,
    seed: u64,
    n_list: Option<Vec<u32>>,
}

fn run_star(op: StarOp, config: &toml::Table) -> Result<()> {
    match op {
        StarOp::Simulate {
            engine,
            n,
            k,
            reps,
            seed,
            n_list,
            fit,
            out,
        } => {
            let sec = "star.simulate";
            let flags = serde_json::json!({
                "engine": engine, "n": n, "k": k, "reps": reps, "seed": seed,
                "n_list": n_list.clone(),
            });
            let defaults = StarSimulateCfg {
                engine: StarEngineArg::Urn,
                n: 100,
                k: 2,
                reps: 1000,
                seed: 1,
                n_list: None,
            };
            let eff = StarSimulateCfg {
                engine: engine.unwrap_or(defaults.engine),
                n: resolve(n, config, sec, "n", defaults.n),
                k: resolve(k, config, sec, "k", defaults.k),
                reps: resolve(reps, config, sec, "reps", defaults.reps),
                seed: resolve(seed, config, sec, "seed", defaults.seed),
                n_list: match &n_list {
                    Some(s) => Some(parse_u32_list(s)?),
                    None => None,
                },
            };
            let mut meta = RunMetadata::new(eff.seed, eff.reps);
            let data = if let Some(list) = eff.n_list.clone() {
                if !matches!(eff.engine, StarEngineArg::Death) {
                    return Err(Error::config(
                        "star sweeps use the death engine (--engine death)",
                    ));
                }
                let points = border_aggregation::experiment::timed(&mut meta, || {
                    star_survivor_sweep(eff.k, &list, eff.reps, eff.seed)
                })?;
                if fit {
                    print_fit(&points)?;
                }
                sweep_csv(&points, "survivors")
            } else {
                let (engine, n_eff, k_eff, seed_eff) = (eff.engine, eff.n, eff.k, eff.seed);
                let results = border_aggregation::experiment::timed(&mut meta, || {
                    par_replicas(eff.reps, eff.seed, |r, _| {
                        star_replica(engine.into(), n_eff, k_eff, seed_eff, r)
                    })
                    .into_iter()
                    .collect::<Result<Vec<_>>>()
                })?;
                let mut csv = String::from("replica,xi,survivors,istar,tau_bar\n");
                for (r, res) in results.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r,
                        res.xi,
                        res.survivors,
                        res.istar,
                        res.tau_bar.map(|t| t.to_string()).unwrap_or_default()
                    ));
                }
                csv
            };
            let meta = meta_with_config(meta, config, "star", &eff, &defaults, &flags);
            emit(Output {
                data: data.into_bytes(),
                meta,
                out: out.out,
            })
        }
        StarOp::Exact { n, k, out } => {
            let n = resolve(n, config, "star.exact", "n", 2);
            let k = resolve(k, config, "star.exact", "k", 2);
            let mut meta = RunMetadata::new(0, 0);
            let pmf = border_aggregation::experiment::timed(&mut meta, || exact_star_pmf(n, k))?;
            let xi = xi_pmf_from_survivors(&pmf, n, k);
            let mut csv = String::from("s,xi,numerator,denominator\n");
            for (s, mass) in pmf.iter() {
                let xi_val = (n as i64) * (k as i64) - s + 1;
                csv.push_str(&format!("{s},{xi_val},{},{}\n", mass.numer(), mass.denom()));
            }
            debug_assert_eq!(xi.len(), pmf.len());
            let meta = meta_with_config(
                meta,
                config,
                "star",
                &serde_json::json!({"n": n, "k": k}),
                &serde_json::json!({"n": 2, "k": 2}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
        StarOp::Tau { n, reps, seed, out } => {
            let sec = "star.tau";
            let n = resolve(n, config, sec, "n", 10_000);
            let reps = resolve(reps, config, sec, "reps", 100_000);
            let seed = resolve(seed, config, sec, "seed", 1);
            let mut meta = RunMetadata::new(seed, reps);
            let samples = border_aggregation::experiment::timed(&mut meta, || {
                Ok(border_aggregation::star::standardized_tau_samples(n, reps, seed))
            })?;
            let ks = border_aggregation::analysis::ks_distance(
                &samples,
                border_aggregation::analysis::normal_cdf,
            )?;
            let mut csv = String::from("replica,tau_std\n");
            for (r, t) in samples.iter().enumerate() {
                csv.push_str(&format!("{r},{t}\n"));
            }
            let mut meta = meta_with_config(
                meta,
                config,
                "star",
                &serde_json::json!({"n": n, "reps": reps, "seed": seed}),
                &serde_json::json!({"n": 10_000, "reps": 100_000, "seed": 1}),
                &serde_json::json!({}),
            );
            meta.effective_config["ks_normal"] = serde_json::json!(ks);
            meta.effective_config["berry_esseen_bound"] =
                serde_json::json!(border_aggregation::star::berry_esseen_bound(n));
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
        StarOp::LimitLaw {
            k,
            a_max,
            points,
            half_nodes,
            out,
        } => {
            let sec = "star.limit_law";
            let k = resolve(k, config, sec, "k", 2);
            let a_max = resolve(a_max, config, sec, "a_max", 2.5);
            let points = resolve(points, config, sec, "points", 50);
            let half_nodes = resolve(half_nodes, config, sec, "half_nodes", 4096);
            let spec = LimitLawSpec {
                k,
                half_nodes,
                ..LimitLawSpec::new(k)
            };
            let mut meta = RunMetadata::new(0, 0);
            let mut csv = String::from("a,g_diagonal,f_zeta_diagonal\n");
            border_aggregation::experiment::timed(&mut meta, || {
                for i in 0..=points {
                    let a = a_max * i as f64 / points as f64;
                    let vec = vec![a; (k - 1) as usize];
                    let g = limit_cdf_g(&vec, &spec)?;
                    let f = limit_density_f_zeta(&vec, k)?;
                    csv.push_str(&format!("{a},{g},{f}\n"));
                }
                Ok(())
            })?;
            let meta = meta_with_config(
                meta,
                config,
                "star",
                &serde_json::json!({"k": k, "a_max": a_max, "points": points, "half_nodes": half_nodes}),
                &serde_json::json!({"k": 2, "a_max": 2.5, "points": 50, "half_nodes": 4096}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
    }
}

fn run_tree(op: TreeOp, config: &toml::Table) -> Result<()> {
    match op {
        TreeOp::Exact { k, out } => {
            let k = resolve(k, config, "tree.exact", "k", 4);
            let mut meta = RunMetadata::new(0, 0);
            let pmf = border_aggregation::experiment::timed(&mut meta, || xi_tree_exact(k))?;
            let mut csv = String::from("k,numerator,denominator\n");
            for (value, mass) in pmf.iter() {
                csv.push_str(&format!("{value},{},{}\n", mass.numer(), mass.denom()));
            }
            let meta = meta_with_config(
                meta,
                config,
                "tree",
                &serde_json::json!({"k": k}),
                &serde_json::json!({"k": 4}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
        TreeOp::Simulate {
            d,
            k,
            reps,
            seed,
            histogram,
            out,
        } => {
            let sec = "tree.simulate";
            let d = resolve(d, config, sec, "d", 2);
            let k = resolve(k, config, sec, "k", 6);
            let reps = resolve(reps, config, sec, "reps", 1000);
            let seed = resolve(seed, config, sec, "seed", 1);
            let mut meta = RunMetadata::new(seed, reps);
            let xis = border_aggregation::experiment::timed(&mut meta, || {
                par_replicas(reps, seed, |_, rng| {
                    border_aggregation::tree::simulate_tree_with(d, k, rng).map(|(o, _)| o.xi)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()
            })?;
            let csv = replica_csv(&xis, histogram);
            let meta = meta_with_config(
                meta,
                config,
                "tree",
                &serde_json::json!({"d": d, "k": k, "reps": reps, "seed": seed}),
                &serde_json::json!({"d": 2, "k": 6, "reps": 1000, "seed": 1}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
        TreeOp::Birthday {
            a,
            m,
            reps,
            seed,
            out,
        } => {
            let sec = "tree.birthday";
            let a = resolve(a, config, sec, "a", 365);
            let m = resolve(m, config, sec, "m", 2);
            let reps = resolve(reps, config, sec, "reps", 10_000);
            let seed = resolve(seed, config, sec, "seed", 1);
            let mut meta = RunMetadata::new(seed, reps);
            let counts = border_aggregation::experiment::timed(&mut meta, || {
                par_replicas(reps, seed, |_, rng| {
                    border_aggregation::tree::simulate_zeta_km_with(a, m, rng)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()
            })?;
            let mut csv = String::from("replica,zeta\n");
            for (r, z) in counts.iter().enumerate() {
                csv.push_str(&format!("{r},{z}\n"));
            }
            if m == 2 {
                // Closed-form tail for the classical case, as a cross-check.
                let t = 2.max(counts.iter().sum::<u64>() / reps.max(1));
                let _ = birthday_tail(a, t);
            }
            let meta = meta_with_config(
                meta,
                config,
                "tree",
                &serde_json::json!({"a": a, "m": m, "reps": reps, "seed": seed}),
                &serde_json::json!({"a": 365, "m": 2, "reps": 10_000, "seed": 1}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
    }
}

fn run_lattice(op: LatticeOp, config: &toml::Table) -> Result<()> {
    match op {
        LatticeOp::Simulate {
            kind,
            d,
            n,
            reps,
            seed,
            snapshot,
            histogram,
            n_list,
            fit,
            out,
        } => {
            let sec = "lattice.simulate";
            let kind = kind.unwrap_or(LatticeKindArg::Disc);
            let d = resolve(d, config, sec, "d", 2);
            let n = resolve(n, config, sec, "n", 16);
            let reps = resolve(reps, config, sec, "reps", 50);
            let seed = resolve(seed, config, sec, "seed", 1);
            let mut meta = RunMetadata::new(seed, reps);
            let data;
            if let Some(list) = n_list.as_deref().map(parse_u32_list).transpose()? {
                let points = border_aggregation::experiment::timed(&mut meta, || {
                    lattice_xi_sweep(kind.into(), d, &list, reps, seed)
                })?;
                if fit {
                    print_fit(&points)?;
                }
                data = sweep_csv(&points, "xi");
            } else {
                let model = build_lattice_model(kind.into(), d, n)?;
                let base = LatticeBase::new(&model)?;
                let outcomes = border_aggregation::experiment::timed(&mut meta, || {
                    par_replicas(reps, seed, |_, rng| {
                        border_aggregation::lattice::simulate_from_base_with(&base, rng, None)
                    })
                    .into_iter()
                    .collect::<Result<Vec<_>>>()
                })?;
                if let Some(snap) = snapshot {
                    let last = outcomes.last().expect("reps >= 1");
                    let format = if snap.extension().map(|e| e == "json").unwrap_or(false) {
                        SnapshotFormat::Json
                    } else {
                        SnapshotFormat::Csv
                    };
                    std::fs::write(&snap, export_snapshot(last, format)?)?;
                }
                let xis: Vec<u64> = outcomes.iter().map(|o| o.xi).collect();
                data = replica_csv(&xis, histogram);
            }
            let meta = meta_with_config(
                meta,
                config,
                "lattice",
                &serde_json::json!({
                    "kind": kind, "d": d, "n": n, "reps": reps, "seed": seed,
                    "n_list": n_list,
                }),
                &serde_json::json!({"kind": "disc", "d": 2, "n": 16, "reps": 50, "seed": 1}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: data.into_bytes(),
                meta,
                out: out.out,
            })
        }
        LatticeOp::Hitmeasure {
            shape,
            r,
            x,
            reps,
            seed,
            enclosure_factor,
            out,
        } => {
            let sec = "lattice.hitmeasure";
            let shape = shape.unwrap_or(HitShapeArg::Segment);
            let r = resolve(r, config, sec, "r", 8);
            let reps = resolve(reps, config, sec, "reps", 100_000);
            let seed = resolve(seed, config, sec, "seed", 1);
            let factor = resolve(enclosure_factor, config, sec, "enclosure_factor", 100.0);
            let target = match shape {
                HitShapeArg::Origin => vec![(0, 0)],
                HitShapeArg::Plus => vec![(1, 0), (-1, 0), (0, 1), (0, -1)],
                HitShapeArg::Segment => segment_target(r),
            };
            let source = match x {
                Some(s) => {
                    let parts: Vec<&str> = s.split(',').collect();
                    if parts.len() != 2 {
                        return Err(Error::config("source must be 'x,y'"));
                    }
                    (
                        parts[0].trim().parse::<i64>().map_err(|e| Error::config(e.to_string()))?,
                        parts[1].trim().parse::<i64>().map_err(|e| Error::config(e.to_string()))?,
                    )
                }
                None => {
                    // Default: the scaling-check source at r^{3/2} ln r.
                    let rr = r as f64;
                    ((rr.powf(1.5) * rr.ln()).ceil() as i64, 0)
                }
            };
            let norm = ((source.0.pow(2) + source.1.pow(2)) as f64).sqrt();
            let mut meta = RunMetadata::new(seed, reps);
            let est = border_aggregation::experiment::timed(&mut meta, || {
                estimate_hitting_measure(&target, source, reps, seed, factor * norm)
            })?;
            let mut csv = String::from("y_x,y_y,count,frequency\n");
            for (i, &(px, py)) in est.target.iter().enumerate() {
                csv.push_str(&format!(
                    "{px},{py},{},{}\n",
                    est.counts[i],
                    est.counts[i] as f64 / est.reps as f64
                ));
            }
            let mut meta = meta_with_config(
                meta,
                config,
                "lattice",
                &serde_json::json!({
                    "shape": shape, "r": r, "source": source, "reps": reps,
                    "seed": seed, "enclosure_factor": factor,
                }),
                &serde_json::json!({"shape": "segment", "r": 8, "reps": 100_000, "seed": 1, "enclosure_factor": 100.0}),
                &serde_json::json!({}),
            );
            meta.effective_config["restarts"] = serde_json::json!(est.restarts);
            emit(Output {
                data: csv.into_bytes(),
                meta,
                out: out.out,
            })
        }
        LatticeOp::Rings {
            n,
            delta,
            reps,
            seed,
            out,
        } => {
            let sec = "lattice.rings";
            let n = resolve(n, config, sec, "n", 64);
            let delta = resolve(delta, config, sec, "delta", 0.1);
            let reps = resolve(reps, config, sec, "reps", 50);
            let seed = resolve(seed, config, sec, "seed", 1);
            let rings = RingSystem::new(n, delta)?;
            let model = GraphModel::Disc2d { n };
            let base = LatticeBase::new(&model)?;
            let mut meta = RunMetadata::new(seed, reps);
            let rows = border_aggregation::experiment::timed(&mut meta, || {
                let outcomes = par_replicas(reps, seed, |_, rng| {
                    border_aggregation::lattice::simulate_from_base_with(&base, rng, None)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                let mut rows = String::from("replica,k,r_k,w_k,nu,zeta\n");
                for (r, o) in outcomes.iter().enumerate() {
                    for rc in ring_crossing_stats(o, &rings)? {
                        rows.push_str(&format!(
                            "{r},{},{},{},{},{}\n",
                            rc.k,
                            rings.radii[rc.k],
                            rings.width_scale(rc.k),
                            rc.nu,
                            rc.zeta.map(|z| z.to_string()).unwrap_or_default()
                        ));
                    }
                }
                Ok(rows)
            })?;
            let meta = meta_with_config(
                meta,
                config,
                "lattice",
                &serde_json::json!({"n": n, "delta": delta, "reps": reps, "seed": seed}),
                &serde_json::json!({"n": 64, "delta": 0.1, "reps": 50, "seed": 1}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: rows.into_bytes(),
                meta,
                out: out.out,
            })
        }
    }
}

fn run_comb(op: CombOp, config: &toml::Table) -> Result<()> {
    match op {
        CombOp::Simulate {
            n,
            reps,
            seed,
            engine,
            frontiers,
            histogram,
            n_list,
            fit,
            out,
        } => {
            let sec = "comb.simulate";
            let n = resolve(n, config, sec, "n", 16);
            let reps = resolve(reps, config, sec, "reps", 200);
            let seed = resolve(seed, config, sec, "seed", 1);
            let engine = engine.unwrap_or(CombEngineArg::Embedded);
            let mut meta = RunMetadata::new(seed, reps);
            let data;
            if let Some(list) = n_list.as_deref().map(parse_u32_list).transpose()? {
                let points = border_aggregation::experiment::timed(&mut meta, || {
                    comb_xi_sweep(engine.into(), &list, reps, seed)
                })?;
                if fit {
                    print_fit(&points)?;
                }
                data = sweep_csv(&points, "xi");
            } else {
                let results = border_aggregation::experiment::timed(&mut meta, || {
                    match CombEngine::from(engine) {
                        CombEngine::Embedded => par_replicas(reps, seed, |_, rng| {
                            border_aggregation::comb::simulate_comb_embedded(n, rng)
                        })
                        .into_iter()
                        .collect::<Result<Vec<_>>>(),
                        CombEngine::Literal => par_replicas(reps, seed, |r, _| {
                            let out = border_aggregation::model::run_ba_stream(
                                &GraphModel::Comb { n },
                                seed,
                                r,
                            )?;
                            let state = CombState::from_outcome(&out)?;
                            Ok((out, state))
                        })
                        .into_iter()
                        .collect::<Result<Vec<_>>>(),
                    }
                })?;
                if let Some(path) = frontiers {
                    let (_, state) = results.last().expect("reps >= 1");
                    std::fs::write(&path, state.frontier_csv())?;
                }
                let xis: Vec<u64> = results.iter().map(|(o, _)| o.xi).collect();
                data = replica_csv(&xis, histogram);
            }
            let meta = meta_with_config(
                meta,
                config,
                "comb",
                &serde_json::json!({"n": n, "reps": reps, "seed": seed, "engine": engine, "n_list": n_list}),
                &serde_json::json!({"n": 16, "reps": 200, "seed": 1, "engine": "embedded"}),
                &serde_json::json!({}),
            );
            emit(Output {
                data: data.into_bytes(),
                meta,
                out: out.out,
            })
        }
    }
}

fn parse_points_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Parse(format!("line {}: need two columns", i + 1)));
        }
        // Skip a header line.
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let x: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        let y: f64 = fields[fields.len() - 1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        points.push((x, y));
    }
    Ok(points)
}

/// Reads a distribution CSV: `value,mass`, `value,count` or the exact
/// `k,numerator,denominator` form; masses are normalized.
fn parse_distribution_csv(path: &Path) -> Result<std::collections::BTreeMap<i64, f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut masses = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        let value: i64 = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        let mass = match fields.len() {
            2 => fields[1]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?,
            3.. => {
                let num: f64 = fields[fields.len() - 2]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                let den: f64 = fields[fields.len() - 1]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
                num / den
            }
            _ => return Err(Error::Parse(format!("line {}: need two columns", i + 1))),
        };
        *masses.entry(value).or_insert(0.0) += mass;
    }
    let total: f64 = masses.values().sum();
    if total <= 0.0 {
        return Err(Error::Parse("distribution has no mass".into()));
    }
    for v in masses.values_mut() {
        *v /= total;
    }
    Ok(masses)
}

fn run_analyze(op: AnalyzeOp, config: &toml::Table) -> Result<()> {
    match op {
        AnalyzeOp::Fit { input, out } => {
            let points = parse_points_csv(&input)?;
            let fit = fit_scaling(&points)?;
            let mut data = serde_json::to_vec_pretty(&fit).map_err(|e| Error::Parse(e.to_string()))?;
            data.push(b'\n');
            let meta = meta_with_config(
                RunMetadata::new(0, 0),
                config,
                "analyze",
                &serde_json::json!({"input": input}),
                &serde_json::json!({}),
                &serde_json::json!({}),
            );
            emit(Output {
                data,
                meta,
                out: out.out,
            })
        }
        AnalyzeOp::Compare { a, b, out } => {
            let pa = parse_distribution_csv(&a)?;
            let pb = parse_distribution_csv(&b)?;
            let tv = tv_distance(&pa, &pb);
            let mut data = serde_json::to_vec_pretty(&serde_json::json!({
                "tv_distance": tv,
                "support_a": pa.len(),
                "support_b": pb.len(),
            }))
            .map_err(|e| Error::Parse(e.to_string()))?;
            data.push(b'\n');
            let meta = meta_with_config(
                RunMetadata::new(0, 0),
                config,
                "analyze",
                &serde_json::json!({"a": a, "b": b}),
                &serde_json::json!({}),
                &serde_json::json!({}),
            );
            emit(Output {
                data,
                meta,
                out: out.out,
            })
        }
    }
}

