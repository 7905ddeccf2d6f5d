//! Statistics shared by all experiments: integer sample accumulators,
//! distribution distances, the normal law, chi-square tails and log-log
//! scaling fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Streaming statistics over integer-valued samples (xi is an integer on
/// every family, so the accumulators are exact and merging is associative
/// bit for bit).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: u64,
    pub sum: i128,
    pub sum_sq: i128,
    pub min: Option<i64>,
    pub max: Option<i64>,
    /// Sparse exact histogram.
    pub histogram: BTreeMap<i64, u64>,
}

impl SampleStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: i64) {
        self.count += 1;
        self.sum += x as i128;
        self.sum_sq += (x as i128) * (x as i128);
        self.min = Some(self.min.map_or(x, |m| m.min(x)));
        self.max = Some(self.max.map_or(x, |m| m.max(x)));
        *self.histogram.entry(x).or_insert(0) += 1;
    }

    pub fn from_samples<I: IntoIterator<Item = i64>>(samples: I) -> Self {
        let mut s = Self::new();
        for x in samples {
            s.push(x);
        }
        s
    }

    /// Associative, commutative merge for parallel reduction.
    pub fn merge(mut self, other: &SampleStats) -> SampleStats {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        for (&k, &v) in &other.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        self.sum_sq as f64 / n - m * m
    }

    /// Empirical probability masses over the histogram support.
    pub fn frequencies(&self) -> BTreeMap<i64, f64> {
        let n = self.count as f64;
        self.histogram
            .iter()
            .map(|(&k, &v)| (k, v as f64 / n))
            .collect()
    }
}

/// Result of fitting `y = c * x^alpha` by least squares on log-log axes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    pub rss: f64,
    pub n: usize,
}

/// OLS fit of `log y` against `log x`. Requires at least three strictly
/// positive points.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::config(format!(
            "scaling fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::config(format!(
            "scaling fit needs positive data, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sum_x: f64 = xs.iter().sum();
    let sum_y: f64 = ys.iter().sum();
    let sum_xx: f64 = xs.iter().map(|x| x * x).sum();
    let sum_xy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sum_xx - sum_x * sum_x;
    if denom.abs() < 1e-12 {
        return Err(Error::config("scaling fit: degenerate abscissae"));
    }
    let alpha = (n * sum_xy - sum_x * sum_y) / denom;
    let intercept = (sum_y - alpha * sum_x) / n;
    let rss = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (alpha * x + intercept);
            r * r
        })
        .sum();
    Ok(ScalingFit {
        alpha,
        intercept,
        rss,
        n: points.len(),
    })
}

/// Standard normal CDF via `erfc` (double-precision fdlibm port from the
/// `libm` crate; absolute error well below 1e-14).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
///
/// Sorts a copy of the sample; the usual two-sided sup over the empirical
/// step function.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::config("ks_distance: empty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((f - hi).abs());
    }
    Ok(d)
}

/// Total variation distance between two probability mass functions given as
/// maps over integer support.
pub fn tv_distance(p: &BTreeMap<i64, f64>, q: &BTreeMap<i64, f64>) -> f64 {
    let mut keys: Vec<i64> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Upper tail P(X > x) of the chi-square law with integer `df`.
///
/// Closed forms for df = 1 (erfc) and df = 2 (exponential), extended by the
/// standard recursion sf(k+2) = sf(k) + (x/2)^(k/2) e^(-x/2) / Gamma(k/2+1).
/// Exact enough for the small degrees of freedom used in goodness-of-fit
/// tests here.
pub fn chi_square_sf(df: u32, x: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::config("chi_square_sf: df must be >= 1"));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    let (mut k, mut sf) = if df % 2 == 1 {
        (1u32, libm::erfc((x / 2.0).sqrt()))
    } else {
        (2u32, (-x / 2.0).exp())
    };
    // term = (x/2)^(k/2) e^{-x/2} / Gamma(k/2 + 1)
    let mut term = match k {
        1 => (x / (2.0 * std::f64::consts::PI)).sqrt() * (-x / 2.0).exp() * 2.0,
        _ => (x / 2.0) * (-x / 2.0).exp(),
    };
    while k < df {
        sf += term;
        k += 2;
        term *= x / k as f64;
    }
    Ok(sf)
}

/// Pearson chi-square p-value of observed integer counts against expected
/// probabilities. Support cells are merged greedily so every expected count
/// is at least `min_expected`.
pub fn chi_square_gof(
    observed: &BTreeMap<i64, u64>,
    expected: &BTreeMap<i64, f64>,
    total: u64,
    min_expected: f64,
) -> Result<f64> {
    if let Some(k) = observed.keys().find(|k| !expected.contains_key(k)) {
        return Err(Error::config(format!(
            "chi_square_gof: observed value {k} outside expected support"
        )));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (k, &p) in expected {
        acc_o += *observed.get(k).unwrap_or(&0) as f64;
        acc_e += p * total as f64;
        if acc_e >= min_expected {
            cells.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_o;
            last.1 += acc_e;
        } else {
            cells.push((acc_o, acc_e));
        }
    }
    if cells.len() < 2 {
        return Err(Error::config("chi_square_gof: fewer than two cells"));
    }
    let stat: f64 = cells
        .iter()
        .map(|&(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    chi_square_sf(cells.len() as u32 - 1, stat)
}

/// Composite Simpson quadrature with `2 * half_nodes` panels. Deterministic
/// fixed-node scheme; no adaptivity.
pub fn integrate_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, half_nodes: usize) -> f64 {
    let n = 2 * half_nodes;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}
