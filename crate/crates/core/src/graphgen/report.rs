use rand::Rng;
use serde::{Deserialize, Serialize};

use super::census::{all_pairs_distances, ball};
use super::{spectral_gap, RegularGraph};
use crate::error::Result;
use crate::green::{green_upper_bound, GreenOperator};
use crate::rng;

/// Check parameters for the finite-size regularity report.
///
/// The asymptotic constants have no canonical numerical values; these are
/// the knobs the checks are evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegularityParams {
    /// Ball radius coefficient: cycles are counted in balls of radius `⌊k1 ln N⌋`.
    pub k1: f64,
    /// Minimum accepted spectral gap.
    pub k2: f64,
    /// Green bound prefactor `K₁`.
    pub big_k1: f64,
    /// Green bound floor exponent `k₃`.
    pub k3: f64,
    /// Minimum edge-boundary to size ratio of probed sets.
    pub expansion_h0: f64,
    /// Number of BFS-grown sets probed.
    pub probe_sets: usize,
}

impl Default for RegularityParams {
    fn default() -> Self {
        Self {
            k1: 0.3,
            k2: 1e-3,
            big_k1: 3.0,
            k3: 0.2,
            expansion_h0: 0.1,
            probe_sets: 100,
        }
    }
}

/// Per-item outcome of the regularity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecksPassed {
    /// Connected, positive gap, and every probed set expands.
    pub expansion: bool,
    /// At most one cycle in every ball.
    pub cycles: bool,
    /// Spectral gap at least `k2`.
    pub spectral_gap: bool,
    /// Green bound on all pairs; `None` when no operator was supplied.
    pub green_bound: Option<bool>,
}

impl ChecksPassed {
    pub fn all(&self) -> bool {
        self.expansion && self.cycles && self.spectral_gap && self.green_bound.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRegularityReport {
    pub spectral_gap: f64,
    /// `None` for disconnected graphs.
    pub diameter: Option<u32>,
    pub ball_radius: u32,
    pub max_cycles_in_ball: usize,
    pub min_expansion_ratio: f64,
    pub green_bound_params: (f64, f64),
    pub green_worst_excess: Option<f64>,
    pub checks_passed: ChecksPassed,
}

/// Evaluates the finite-`N` regularity checks on `g`.
///
/// `probe_seed` drives the randomized expansion probe.
pub fn structural_report(
    g: &RegularGraph,
    params: &RegularityParams,
    green: Option<&GreenOperator>,
    probe_seed: u64,
) -> Result<GraphRegularityReport> {
    let n = g.n();
    let kappa = spectral_gap(g)?;
    let dist = all_pairs_distances(g);
    let connected = g.is_connected();

    let radius = (params.k1 * (n as f64).ln()).floor().max(0.0) as u32;
    let max_cycles = max_cycles_in_balls(g, radius);

    let min_ratio = expansion_probe(g, params.probe_sets, probe_seed);

    let (green_ok, worst) = match green {
        Some(op) => {
            let check = green_upper_bound(g, op, &dist, params.big_k1, params.k3)?;
            (Some(check.holds), Some(check.worst_excess))
        }
        None => (None, None),
    };

    let checks_passed = ChecksPassed {
        expansion: connected && kappa > 0.0 && min_ratio >= params.expansion_h0,
        cycles: max_cycles <= 1,
        spectral_gap: kappa >= params.k2,
        green_bound: green_ok,
    };
    Ok(GraphRegularityReport {
        spectral_gap: kappa,
        diameter: dist.diameter(),
        ball_radius: radius,
        max_cycles_in_ball: max_cycles,
        min_expansion_ratio: min_ratio,
        green_bound_params: (params.big_k1, params.k3),
        green_worst_excess: worst,
        checks_passed,
    })
}

/// Largest first Betti number `|E| - |V| + 1` over induced radius-`radius` balls.
fn max_cycles_in_balls(g: &RegularGraph, radius: u32) -> usize {
    let n = g.n();
    let mut stamp = vec![usize::MAX; n];
    let mut depth = vec![0u32; n];
    let mut max = 0;
    for x in 0..n {
        let members = ball(g, x, radius, &mut stamp, &mut depth);
        let twice_edges: usize = members
            .iter()
            .map(|&u| {
                g.neighbors(u)
                    .iter()
                    .filter(|&&w| stamp[w as usize] == x)
                    .count()
            })
            .sum();
        // the ball is connected through its BFS tree, so one component
        let cycles = twice_edges / 2 + 1 - members.len();
        max = max.max(cycles);
    }
    max
}

/// Minimum boundary-to-size ratio over BFS-grown connected sets of size `≤ N/2`.
fn expansion_probe(g: &RegularGraph, sets: usize, seed: u64) -> f64 {
    let n = g.n();
    let half = (n / 2).max(1);
    let mut rng = rng::stream(seed, rng::DOMAIN_PROBE, g.seed());
    let mut member = vec![usize::MAX; n];
    let mut min_ratio = f64::INFINITY;
    let mut order = Vec::with_capacity(half);
    for probe in 0..sets {
        let start = rng.random_range(0..n);
        let target = rng.random_range(1..=half);
        order.clear();
        order.push(start);
        member[start] = probe;
        let mut head = 0;
        'grow: while head < order.len() && order.len() < target {
            let u = order[head];
            head += 1;
            for &w in g.neighbors(u) {
                let w = w as usize;
                if member[w] != probe {
                    member[w] = probe;
                    order.push(w);
                    if order.len() == target {
                        break 'grow;
                    }
                }
            }
        }
        let boundary: usize = order
            .iter()
            .map(|&u| {
                g.neighbors(u)
                    .iter()
                    .filter(|&&w| member[w as usize] != probe)
                    .count()
            })
            .sum();
        min_ratio = min_ratio.min(boundary as f64 / order.len() as f64);
    }
    min_ratio
}
