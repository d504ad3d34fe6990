use rayon::prelude::*;
use serde::Serialize;

use super::{generate_simple, vertex_census, DEFAULT_MAX_ATTEMPTS};
use crate::error::{Error, Result};
use crate::rng;

/// Tail estimate at one level `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailPoint {
    pub z: f64,
    /// `r²(r-1)^{2ℓ-2}·z`
    pub threshold: f64,
    pub exceed_count: usize,
    pub tail: f64,
    /// Wilson 95% interval for the tail probability.
    pub ci: (f64, f64),
    /// `K₂/z` for the configured (or fitted) `K₂`.
    pub bound: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadTailReport {
    pub n: usize,
    pub degree: usize,
    pub ell: u32,
    pub n_graphs: usize,
    /// `r²(r-1)^{2ℓ-2}`
    pub scale: f64,
    pub mean_bad: f64,
    /// `mean_bad / scale`
    pub fitted_k: f64,
    /// `K₂` used for the tail bound; the fitted `K` when not supplied.
    pub k2: f64,
    pub bad_counts: Vec<usize>,
    pub points: Vec<TailPoint>,
}

/// Monte Carlo estimate of `P(|bad_ℓ| ≥ r²(r-1)^{2ℓ-2} z)` over `n_graphs`
/// independent random regular graphs.
pub fn bad_tail_check(
    n: usize,
    degree: usize,
    ell: u32,
    zs: &[f64],
    n_graphs: usize,
    seed: u64,
    k2: Option<f64>,
) -> Result<BadTailReport> {
    if degree < 3 {
        return Err(Error::invalid("degree must be at least 3"));
    }
    let limit = (5.0 * n as f64).ln() / ((degree - 1) as f64).ln();
    if ell as f64 >= limit {
        return Err(Error::invalid(format!(
            "ell = {ell} must be below log_(r-1)(5N) = {limit:.3}"
        )));
    }
    if n_graphs == 0 {
        return Err(Error::invalid("need at least one graph"));
    }
    let bad_counts: Vec<usize> = (0..n_graphs as u64)
        .into_par_iter()
        .map(|i| {
            let s = rng::stream_seed(seed, rng::DOMAIN_GRAPH_SEED, i);
            generate_simple(n, degree, s, DEFAULT_MAX_ATTEMPTS)
                .map(|g| vertex_census(&g, ell).bad_count)
        })
        .collect::<Result<_>>()?;

    let rf = degree as f64;
    let scale = if ell == 0 {
        rf * rf / (rf - 1.0).powi(2)
    } else {
        rf * rf * (rf - 1.0).powi(2 * ell as i32 - 2)
    };
    let mean_bad = bad_counts.iter().sum::<usize>() as f64 / n_graphs as f64;
    let fitted_k = mean_bad / scale;
    let k2 = k2.unwrap_or(fitted_k);
    let points = zs
        .iter()
        .map(|&z| {
            let threshold = scale * z;
            let exceed_count = bad_counts
                .iter()
                .filter(|&&b| b as f64 >= threshold)
                .count();
            let tail = exceed_count as f64 / n_graphs as f64;
            let bound = k2 / z;
            TailPoint {
                z,
                threshold,
                exceed_count,
                tail,
                ci: wilson_interval(exceed_count, n_graphs, 1.96),
                bound,
                violation: tail > bound,
            }
        })
        .collect();
    Ok(BadTailReport {
        n,
        degree,
        ell,
        n_graphs,
        scale,
        mean_bad,
        fitted_k,
        k2,
        bad_counts,
        points,
    })
}

pub(crate) fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
