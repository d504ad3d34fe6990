//! Gaussian comparison machinery: the interpolation identity, the bivariate
//! rectangle bound, the increasing function `H`, and the comparison sums
//! over pairs of vertices on the tree and on a graph.

use std::collections::HashMap;
use std::f64::consts::PI;

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremes::RescalingConstants;
use crate::gff::TreeSubtree;
use crate::graphgen::{DistanceMatrix, RegularGraph, UNREACHABLE};
use crate::green::GreenOperator;
use crate::quadrature::{gauss_hermite_normal, gauss_legendre, Rule};
use crate::rng::from_seed;
use crate::special::normal_interval;

/// Gauss–Legendre nodes in the interpolation parameter `h`.
pub const DEFAULT_H_NODES: usize = 21;
/// Gauss–Legendre nodes per axis for rectangle probabilities.
pub const DEFAULT_RECT_NODES: usize = 40;
/// Gauss–Hermite order per axis for expectations with `n ≤ 3`.
pub const DEFAULT_HERMITE_ORDER: usize = 64;
/// Largest family size for exact pair sums.
pub const PAIR_SUM_CAP: usize = 64;

/// `H(ρ) = (1-ρ²)^{-1/2} exp(-a²/(1+ρ))`, strictly increasing on `[0, 1)`.
pub fn h_function(rho: f64, a_n: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!("H needs rho in [0, 1), got {rho}")));
    }
    Ok(h_raw(rho, a_n))
}

#[inline]
fn h_raw(rho: f64, a: f64) -> f64 {
    (-a * a / (1.0 + rho)).exp() / (1.0 - rho * rho).sqrt()
}

/// Bounded open window `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "window ({lo}, {hi}) must be bounded and non-empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// `dist(-u, S) = inf_{s∈S} |u + s|`.
    pub fn dist_from_neg(&self, u: f64) -> f64 {
        if u + self.lo >= 0.0 {
            u + self.lo
        } else if u + self.hi <= 0.0 {
            -(u + self.hi)
        } else {
            0.0
        }
    }

    pub fn scaled(&self, b: f64) -> Window {
        Window {
            lo: b * self.lo,
            hi: b * self.hi,
        }
    }

    pub fn shifted(&self, u: f64) -> Window {
        Window {
            lo: u + self.lo,
            hi: u + self.hi,
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "correlation must lie in (-1, 1), got {rho}"
        )))
    }
}

/// Upper bound on `P(X ∈ u+S, Y ∈ u+S)` for a standard bivariate Gaussian
/// with correlation `ρ`: `|S|²/(2π√(1-ρ²)) · exp(-d²/(1+ρ))`, `d = dist(-u, S)`.
///
/// Valid for every `ρ ∈ (-1, 1)` because `u+S` lies on one side of 0 when `d > 0`.
pub fn bivariate_bound(rho: f64, u: f64, s: Window) -> Result<f64> {
    check_rho(rho)?;
    Window::new(s.lo, s.hi)?;
    let d = s.dist_from_neg(u);
    Ok(s.len().powi(2) / (2.0 * PI * (1.0 - rho * rho).sqrt()) * (-d * d / (1.0 + rho)).exp())
}

#[inline]
fn bivariate_density(x: f64, y: f64, rho: f64) -> f64 {
    let q = 1.0 - rho * rho;
    (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * q)).exp() / (2.0 * PI * q.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ProbMethod {
    /// Tensor Gauss–Legendre with `nodes` points per axis.
    Quadrature { nodes: usize },
    /// `draws` samples from the stream seeded by `seed`.
    MonteCarlo { draws: usize, seed: u64 },
}

impl Default for ProbMethod {
    fn default() -> Self {
        ProbMethod::Quadrature {
            nodes: DEFAULT_RECT_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub value: f64,
    /// One standard error for Monte Carlo; the gap to the half-resolution rule for quadrature.
    pub error: f64,
    /// Set when the budget was too small for a trustworthy error bar.
    pub flagged: bool,
}

/// `P(X ∈ u+S, Y ∈ u+S)` for a standard bivariate Gaussian with correlation `ρ`.
pub fn bivariate_prob(rho: f64, u: f64, s: Window, method: ProbMethod) -> Result<ProbEstimate> {
    check_rho(rho)?;
    Window::new(s.lo, s.hi)?;
    let box_ = s.shifted(u);
    match method {
        ProbMethod::Quadrature { nodes } => {
            if nodes == 0 {
                return Err(Error::invalid("quadrature needs at least one node"));
            }
            let full = rect_quadrature(rho, box_, nodes);
            let half = rect_quadrature(rho, box_, (nodes / 2).max(1));
            let flagged = nodes < 8;
            let mut error = (full - half).abs();
            if flagged {
                error = error.max(full.abs());
            }
            Ok(ProbEstimate {
                value: full,
                error,
                flagged,
            })
        }
        ProbMethod::MonteCarlo { draws, seed } => {
            if draws == 0 {
                return Err(Error::invalid("Monte Carlo needs at least one draw"));
            }
            let mut rng = from_seed(seed);
            let c = (1.0 - rho * rho).sqrt();
            let mut hits = 0u64;
            for _ in 0..draws {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let x = z1;
                let y = rho * z1 + c * z2;
                if x > box_.lo && x < box_.hi && y > box_.lo && y < box_.hi {
                    hits += 1;
                }
            }
            let n = draws as f64;
            let p = hits as f64 / n;
            // Below 10 hits the binomial standard error is unreliable; use the
            // one-sided 95% rule-of-three scale instead.
            let flagged = hits < 10;
            let se = (p * (1.0 - p) / n).sqrt();
            let error = if flagged { se.max(3.0 / n) } else { se };
            Ok(ProbEstimate {
                value: p,
                error,
                flagged,
            })
        }
    }
}

fn rect_quadrature(rho: f64, b: Window, nodes: usize) -> f64 {
    let rule = gauss_legendre(nodes).on_interval(b.lo, b.hi);
    let mut s = 0.0;
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
            s += wx * wy * bivariate_density(x, y, rho);
        }
    }
    s
}

/// Conditional one-dimensional form of the rectangle probability:
/// `∫_{u+S} φ(x) P(ρx + √(1-ρ²)Z ∈ u+S) dx`.
pub fn bivariate_prob_conditional(rho: f64, u: f64, s: Window) -> Result<f64> {
    check_rho(rho)?;
    let b = s.shifted(u);
    let c = (1.0 - rho * rho).sqrt();
    let rule = crate::quadrature::composite_gauss_legendre(b.lo, b.hi, 16, 20);
    Ok(rule.integrate(|x| {
        crate::special::normal_pdf(x) * normal_interval((b.lo - rho * x) / c, (b.hi - rho * x) / c)
    }))
}

/// Covariance ends `Σ(0)`, `Σ(1)` and the path `Σ(h) = (1-h)Σ(0) + hΣ(1)`.
#[derive(Debug, Clone)]
pub struct InterpolationFamily {
    sigma0: Mat<f64>,
    sigma1: Mat<f64>,
}

impl InterpolationFamily {
    /// Both ends symmetric, PSD to `-1e-10`, with equal diagonals to `1e-12`.
    pub fn new(sigma0: Mat<f64>, sigma1: Mat<f64>) -> Result<Self> {
        let n = sigma0.nrows();
        if sigma0.ncols() != n || sigma1.nrows() != n || sigma1.ncols() != n || n == 0 {
            return Err(Error::invalid(
                "covariance ends must be square of equal size",
            ));
        }
        for m in [&sigma0, &sigma1] {
            for i in 0..n {
                for j in 0..n {
                    if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                        return Err(Error::invalid("covariance end is not symmetric"));
                    }
                }
            }
            let eig = m
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
            if eig[0] < -1e-10 {
                return Err(Error::invalid(format!(
                    "covariance end has eigenvalue {}",
                    eig[0]
                )));
            }
        }
        for i in 0..n {
            if (sigma0[(i, i)] - sigma1[(i, i)]).abs() > 1e-12 {
                return Err(Error::invalid("covariance ends have different diagonals"));
            }
        }
        Ok(Self { sigma0, sigma1 })
    }

    pub fn n(&self) -> usize {
        self.sigma0.nrows()
    }

    pub fn sigma0(&self) -> &Mat<f64> {
        &self.sigma0
    }

    pub fn sigma1(&self) -> &Mat<f64> {
        &self.sigma1
    }

    pub fn interpolate(&self, h: f64) -> Mat<f64> {
        Mat::from_fn(self.n(), self.n(), |i, j| {
            (1.0 - h) * self.sigma0[(i, j)] + h * self.sigma1[(i, j)]
        })
    }

    /// `Σ(1) - Σ(0)`.
    pub fn delta(&self) -> Mat<f64> {
        Mat::from_fn(self.n(), self.n(), |i, j| {
            self.sigma1[(i, j)] - self.sigma0[(i, j)]
        })
    }
}

/// Symmetric square root factor `L` with `L Lᵀ = Σ`.
fn psd_factor(sigma: &Mat<f64>) -> Result<Mat<f64>> {
    let n = sigma.nrows();
    let evd = sigma
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector();
    let u = evd.U();
    for k in 0..n {
        if vals[k] < -1e-9 {
            return Err(Error::OperatorQuality(format!(
                "interpolant has eigenvalue {}",
                vals[k]
            )));
        }
    }
    Ok(Mat::from_fn(n, n, |i, k| {
        u[(i, k)] * vals[k].max(0.0).sqrt()
    }))
}

/// Smooth test functional with an explicit Hessian.
pub trait Functional: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Row-major `n × n` Hessian at `x`.
    fn hessian(&self, x: &[f64], out: &mut [f64]);
}

/// `F(x) = x_i x_j`.
#[derive(Debug, Clone, Copy)]
pub struct Bilinear {
    pub n: usize,
    pub i: usize,
    pub j: usize,
}

impl Functional for Bilinear {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        x[self.i] * x[self.j]
    }

    fn hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[self.i * self.n + self.j] += 1.0;
        out[self.j * self.n + self.i] += 1.0;
    }
}

/// `F(x) = Π_k σ((x_k - c_k)/w_k)` with the logistic `σ`: a product of smooth ramps.
#[derive(Debug, Clone)]
pub struct LogisticProduct {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
}

impl LogisticProduct {
    fn parts(&self, x: &[f64]) -> Vec<(f64, f64, f64)> {
        x.iter()
            .zip(self.centers.iter().zip(&self.widths))
            .map(|(&xk, (&c, &w))| {
                let s = 1.0 / (1.0 + (-(xk - c) / w).exp());
                let d1 = s * (1.0 - s) / w;
                let d2 = s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
                (s, d1, d2)
            })
            .collect()
    }
}

impl Functional for LogisticProduct {
    fn dim(&self) -> usize {
        self.centers.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.parts(x).iter().map(|p| p.0).product()
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let p = self.parts(x);
        for i in 0..n {
            for j in 0..n {
                let mut v = 1.0;
                for (k, pk) in p.iter().enumerate() {
                    v *= if i == j && k == i {
                        pk.2
                    } else if k == i || k == j {
                        pk.1
                    } else {
                        pk.0
                    };
                }
                out[i * n + j] = v;
            }
        }
    }
}

/// `F(x) = exp(-½ Σ_k w_k x_k²)`.
#[derive(Debug, Clone)]
pub struct ExpNegSum {
    pub weights: Vec<f64>,
}

impl Functional for ExpNegSum {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (-0.5
            * x.iter()
                .zip(&self.weights)
                .map(|(v, w)| w * v * v)
                .sum::<f64>())
        .exp()
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let f = self.value(x);
        let g: Vec<f64> = x.iter().zip(&self.weights).map(|(v, w)| -w * v).collect();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = f * (g[i] * g[j] - if i == j { self.weights[i] } else { 0.0 });
            }
        }
    }
}

/// How Gaussian expectations `E[f(Y)]`, `Y ~ N(0, Σ)`, are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum ExpectationMethod {
    /// Tensor Gauss–Hermite with `order` points per axis.
    GaussHermite { order: usize },
    /// `draws` shared standard normal vectors from `seed`.
    MonteCarlo { draws: usize, seed: u64 },
}

impl ExpectationMethod {
    /// Order 64 for `n ≤ 3`, order 16 for `n ≤ 5`, `10⁶` draws above.
    pub fn default_for(n: usize) -> Self {
        match n {
            0..=3 => ExpectationMethod::GaussHermite {
                order: DEFAULT_HERMITE_ORDER,
            },
            4..=5 => ExpectationMethod::GaussHermite { order: 16 },
            _ => ExpectationMethod::MonteCarlo {
                draws: 1_000_000,
                seed: 0x1d,
            },
        }
    }
}

/// Standard normal points and weights used for every `h`.
struct NormalCloud {
    n: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalCloud {
    fn new(n: usize, method: ExpectationMethod) -> Result<Self> {
        match method {
            ExpectationMethod::GaussHermite { order } => {
                let total = order
                    .checked_pow(n as u32)
                    .filter(|&t| t <= 50_000_000)
                    .ok_or_else(|| {
                        Error::invalid(format!("Gauss-Hermite grid {order}^{n} is too large"))
                    })?;
                let rule = gauss_hermite_normal(order);
                let mut points = Vec::with_capacity(total * n);
                let mut weights = Vec::with_capacity(total);
                let mut idx = vec![0usize; n];
                for _ in 0..total {
                    let mut w = 1.0;
                    for &k in &idx {
                        points.push(rule.nodes[k]);
                        w *= rule.weights[k];
                    }
                    weights.push(w);
                    for d in idx.iter_mut() {
                        *d += 1;
                        if *d < order {
                            break;
                        }
                        *d = 0;
                    }
                }
                Ok(Self { n, points, weights })
            }
            ExpectationMethod::MonteCarlo { draws, seed } => {
                let mut rng = from_seed(seed);
                let points = (0..draws * n).map(|_| rng.sample(StandardNormal)).collect();
                Ok(Self {
                    n,
                    points,
                    weights: vec![1.0 / draws as f64; draws],
                })
            }
        }
    }

    /// `E[f(L z)]` over the cloud.
    fn expect(&self, l: &Mat<f64>, f: &(impl Fn(&[f64], &mut Vec<f64>) -> f64 + Sync)) -> f64 {
        let n = self.n;
        let chunk = 4096;
        let partial: Vec<f64> = self
            .weights
            .par_chunks(chunk)
            .enumerate()
            .map(|(c, ws)| {
                let mut y = vec![0.0; n];
                let mut scratch = Vec::new();
                let mut s = 0.0;
                for (t, &w) in ws.iter().enumerate() {
                    let z = &self.points[(c * chunk + t) * n..(c * chunk + t + 1) * n];
                    for i in 0..n {
                        y[i] = (0..n).map(|k| l[(i, k)] * z[k]).sum();
                    }
                    s += w * f(&y, &mut scratch);
                }
                s
            })
            .collect();
        partial.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `E[F(Y(1))] - E[F(Y(0))]`
    pub lhs: f64,
    /// `½ Σ_ij ∫₀¹ (Σ_ij(1) - Σ_ij(0)) E[∂_ij F(Y(h))] dh`
    pub rhs: f64,
    pub gap: f64,
}

/// Both sides of the Gaussian interpolation identity for `F` along `fam`.
pub fn interpolation_identity_check(
    fam: &InterpolationFamily,
    f: &dyn Functional,
    h_nodes: usize,
    method: ExpectationMethod,
) -> Result<IdentityCheck> {
    let n = fam.n();
    if f.dim() != n {
        return Err(Error::invalid(format!(
            "functional has dimension {}, family {n}",
            f.dim()
        )));
    }
    if h_nodes == 0 {
        return Err(Error::invalid("h quadrature needs at least one node"));
    }
    let cloud = NormalCloud::new(n, method)?;
    let value = |y: &[f64], _: &mut Vec<f64>| f.value(y);
    let lhs = cloud.expect(&psd_factor(fam.sigma1())?, &value)
        - cloud.expect(&psd_factor(fam.sigma0())?, &value);
    let delta = fam.delta();
    let contraction = |y: &[f64], scratch: &mut Vec<f64>| {
        scratch.resize(n * n, 0.0);
        f.hessian(y, scratch);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += delta[(i, j)] * scratch[i * n + j];
            }
        }
        s
    };
    let rule = gauss_legendre(h_nodes).on_interval(0.0, 1.0);
    let mut rhs = 0.0;
    for (&h, &w) in rule.nodes.iter().zip(&rule.weights) {
        let l = psd_factor(&fam.interpolate(h))?;
        rhs += w * cloud.expect(&l, &contraction);
    }
    rhs *= 0.5;
    Ok(IdentityCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Unordered pair counts and maximal correlations by distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistanceProfile {
    pub n: usize,
    pub degree: usize,
    /// `counts[k]` unordered pairs at distance `k`; `counts[0] = 0`.
    pub counts: Vec<u64>,
    /// `rhos[k]`, the largest correlation at distance `k`; `rhos[0] = 1`.
    pub rhos: Vec<f64>,
    /// Pairs at infinite distance.
    pub unreachable_pairs: u64,
    /// Smallest `C` with `n_k ≤ C N min{r(r-1)^{k-1}, N}` for all `k ≥ 1`.
    pub sphere_constant: f64,
}

impl PairDistanceProfile {
    pub fn k_max(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    pub fn total_pairs(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unreachable_pairs
    }

    /// `Σ_k n_k ρ_k H(ρ_k)` with negative `ρ_k` clamped to 0.
    pub fn profile_sum(&self, a_n: f64) -> f64 {
        (1..self.counts.len())
            .map(|k| {
                let rho = self.rhos[k].max(0.0);
                self.counts[k] as f64 * rho * h_raw(rho, a_n)
            })
            .sum()
    }
}

fn sphere_constant(n: usize, degree: usize, counts: &[u64]) -> f64 {
    let nf = n as f64;
    let r = degree as f64;
    (1..counts.len())
        .map(|k| {
            let sphere = (r * (r - 1.0).powi(k as i32 - 1)).min(nf);
            counts[k] as f64 / (nf * sphere)
        })
        .fold(0.0, f64::max)
}

/// Exact distance histogram of a BFS-prefix subtree, with `ρ_k = (r-1)^{-k}`.
///
/// Dynamic programming over the rooted tree: each vertex keeps the number of
/// its descendants at every relative depth, and pairs are counted at their
/// lowest common ancestor.
pub fn pair_profile_tree(t: &TreeSubtree) -> PairDistanceProfile {
    let n = t.n();
    let height = t.height() as usize;
    let mut counts = vec![0u64; 2 * height + 1];
    let mut hist: Vec<Vec<u64>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let mut h = std::mem::take(&mut hist[v]);
        if h.is_empty() {
            h.push(0);
        }
        // `h` already holds merged children at depth ≥ 1; add `v` itself and
        // count pairs (v, descendant).
        h[0] = 1;
        for (d, &c) in h.iter().enumerate().skip(1) {
            counts[d] += c;
        }
        if let Some(p) = t.parent(v) {
            let mut ph = std::mem::take(&mut hist[p]);
            if ph.is_empty() {
                ph.push(0);
            }
            // Cross pairs between earlier children of `p` and this subtree.
            for (d1, &c1) in ph.iter().enumerate().skip(1) {
                if c1 == 0 {
                    continue;
                }
                for (d2, &c2) in h.iter().enumerate() {
                    counts[d1 + d2 + 1] += c1 * c2;
                }
            }
            if ph.len() < h.len() + 1 {
                ph.resize(h.len() + 1, 0);
            }
            for (d2, &c2) in h.iter().enumerate() {
                ph[d2 + 1] += c2;
            }
            hist[p] = ph;
        }
    }
    while counts.len() > 1 && *counts.last().unwrap() == 0 {
        counts.pop();
    }
    let ratio = 1.0 / (t.degree() as f64 - 1.0);
    let rhos = (0..counts.len()).map(|k| ratio.powi(k as i32)).collect();
    PairDistanceProfile {
        n,
        degree: t.degree(),
        sphere_constant: sphere_constant(n, t.degree(), &counts),
        counts,
        rhos,
        unreachable_pairs: 0,
    }
}

/// Distance histogram of a graph with `ρ_k = max{ρ_xy : d(x,y) = k}`,
/// `ρ_xy = G(x,y)/√(G(x,x)G(y,y))`.
pub fn pair_profile_graph(
    g: &RegularGraph,
    green: &GreenOperator,
    dist: &DistanceMatrix,
) -> Result<PairDistanceProfile> {
    let n = g.n();
    if green.n() != n || dist.n() != n {
        return Err(Error::invalid(
            "operator, distance table and graph sizes differ",
        ));
    }
    let diag = green.diagonal();
    let mut counts = vec![0u64; 1];
    let mut rhos = vec![1.0];
    let mut unreachable_pairs = 0;
    for x in 0..n {
        for y in x + 1..n {
            let d = dist.get(x, y);
            if d == UNREACHABLE {
                unreachable_pairs += 1;
                continue;
            }
            let d = d as usize;
            if counts.len() <= d {
                counts.resize(d + 1, 0);
                rhos.resize(d + 1, f64::NEG_INFINITY);
            }
            counts[d] += 1;
            rhos[d] = rhos[d].max(green.get(x, y) / (diag[x] * diag[y]).sqrt());
        }
    }
    Ok(PairDistanceProfile {
        n,
        degree: g.degree(),
        sphere_constant: sphere_constant(n, g.degree(), &counts),
        counts,
        rhos,
        unreachable_pairs,
    })
}

/// Evaluated bound chain for the tree comparison sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeComparison {
    pub n: usize,
    pub degree: usize,
    pub a_n: f64,
    /// `Σ_{{x,y}} ρ_xy H(ρ_xy) = Σ_k n_k ρ_k H(ρ_k)` over unordered pairs.
    pub exact_sum: f64,
    /// `H(ρ₁) Σ_k n_k ρ_k`
    pub h_rho1_bound: f64,
    /// `H(ρ₁) N ln N`
    pub n_log_n_form: f64,
    /// Smallest `C̃` with `exact_sum ≤ C̃ H(ρ₁) N ln N`.
    pub fitted_c_tilde: f64,
    /// `(2-r)/r`
    pub exponent: f64,
    /// `|S|²/(2π) · 2 · exact_sum` for `|S| = 1`; scale by `|S|²`.
    pub t_n_bound_unit: f64,
}

impl TreeComparison {
    pub fn t_n_bound(&self, s_len: f64) -> f64 {
        self.t_n_bound_unit * s_len * s_len
    }
}

pub fn comparison_sum_tree(
    profile: &PairDistanceProfile,
    c: &RescalingConstants,
) -> TreeComparison {
    let a = c.a_n;
    let exact_sum = profile.profile_sum(a);
    let rho1 = profile.rhos.get(1).copied().unwrap_or(0.0).max(0.0);
    let h1 = h_raw(rho1, a);
    let weighted: f64 = (1..profile.counts.len())
        .map(|k| profile.counts[k] as f64 * profile.rhos[k])
        .sum();
    let nf = profile.n as f64;
    let n_log_n_form = h1 * nf * nf.ln();
    let r = profile.degree as f64;
    TreeComparison {
        n: profile.n,
        degree: profile.degree,
        a_n: a,
        exact_sum,
        h_rho1_bound: h1 * weighted,
        n_log_n_form,
        fitted_c_tilde: if n_log_n_form > 0.0 {
            exact_sum / n_log_n_form
        } else {
            0.0
        },
        exponent: (2.0 - r) / r,
        t_n_bound_unit: 2.0 * exact_sum / (2.0 * PI),
    }
}

/// `⌈(k₃+δ)/ln(r-1) · ln N⌉`.
pub fn k_star(n: usize, degree: usize, k3: f64, delta: f64) -> u32 {
    ((k3 + delta) / (degree as f64 - 1.0).ln() * (n as f64).ln()).ceil() as u32
}

/// Near/far split of the graph comparison sum at distance `k⋆`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphComparison {
    pub k_star: u32,
    /// Negative correlations clamped to 0.
    pub eps_near: f64,
    pub eps_far: f64,
    pub total: f64,
    pub clamped_pairs: u64,
    /// `|ρ_xy|` in place of `ρ_xy`.
    pub abs_eps_near: f64,
    pub abs_eps_far: f64,
    pub abs_total: f64,
    pub n_pairs: u64,
    pub max_rho: f64,
}

#[derive(Default, Clone, Copy)]
struct PairAccumulator {
    near: f64,
    far: f64,
    abs_near: f64,
    abs_far: f64,
    clamped: u64,
    pairs: u64,
    max_rho: f64,
    anomaly: Option<(usize, usize, f64)>,
}

/// Exact unordered-pair sum `Σ ρ_xy H(ρ_xy)`, split at `k⋆`.
///
/// With `mask`, only pairs of masked-in vertices are summed. Rows are reduced
/// in vertex order, so the result does not depend on the thread count.
pub fn comparison_sum_graph(
    g: &RegularGraph,
    green: &GreenOperator,
    dist: &DistanceMatrix,
    c: &RescalingConstants,
    k3: f64,
    delta: f64,
    mask: Option<&[bool]>,
) -> Result<GraphComparison> {
    let n = g.n();
    if green.n() != n || dist.n() != n {
        return Err(Error::invalid(
            "operator, distance table and graph sizes differ",
        ));
    }
    if mask.is_some_and(|m| m.len() != n) {
        return Err(Error::invalid("mask length differs from graph size"));
    }
    let ks = k_star(n, g.degree(), k3, delta);
    let a = c.a_n;
    let diag = green.diagonal();
    let keep = |x: usize| mask.is_none_or(|m| m[x]);
    let rows: Vec<PairAccumulator> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = PairAccumulator {
                max_rho: f64::NEG_INFINITY,
                ..Default::default()
            };
            if !keep(x) {
                return acc;
            }
            for y in x + 1..n {
                if !keep(y) {
                    continue;
                }
                let rho = green.get(x, y) / (diag[x] * diag[y]).sqrt();
                acc.pairs += 1;
                acc.max_rho = acc.max_rho.max(rho);
                if rho.is_nan() || rho.abs() >= 1.0 {
                    acc.anomaly.get_or_insert((x, y, rho));
                    continue;
                }
                let clamped = rho.max(0.0);
                if rho < 0.0 {
                    acc.clamped += 1;
                }
                let term = clamped * h_raw(clamped, a);
                let abs_term = rho.abs() * h_raw(rho.abs(), a);
                if dist.get(x, y) <= ks {
                    acc.near += term;
                    acc.abs_near += abs_term;
                } else {
                    acc.far += term;
                    acc.abs_far += abs_term;
                }
            }
            acc
        })
        .collect();
    let mut tot = PairAccumulator {
        max_rho: f64::NEG_INFINITY,
        ..Default::default()
    };
    for r in rows {
        if let Some((x, y, rho)) = r.anomaly {
            return Err(Error::OperatorQuality(format!(
                "correlation {rho} at pair ({x}, {y}) is not below 1"
            )));
        }
        tot.near += r.near;
        tot.far += r.far;
        tot.abs_near += r.abs_near;
        tot.abs_far += r.abs_far;
        tot.clamped += r.clamped;
        tot.pairs += r.pairs;
        tot.max_rho = tot.max_rho.max(r.max_rho);
    }
    Ok(GraphComparison {
        k_star: ks,
        eps_near: tot.near,
        eps_far: tot.far,
        total: tot.near + tot.far,
        clamped_pairs: tot.clamped,
        abs_eps_near: tot.abs_near,
        abs_eps_far: tot.abs_far,
        abs_total: tot.abs_near + tot.abs_far,
        n_pairs: tot.pairs,
        max_rho: tot.max_rho,
    })
}

/// The comparison hypothesis sum and the bounds it is checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqToZero {
    /// `(1/b²) ∫₀¹ Σ_{i≠j} |ΔΣ_ij| P((X_i(h)-a)/b ∈ S, (X_j(h)-a)/b ∈ S) dh`
    pub value: f64,
    /// Largest probability error bar times its weight, summed.
    pub error: f64,
    /// Same integral with each probability replaced by its rectangle bound.
    pub lemma_bound: f64,
    /// `|S|²/(2π) Σ_{i≠j} |ΔΣ_ij| H(ρ_ij(1))`; only for `inf S ≥ 0` and `ρ_ij ≥ 0` on the path.
    pub a_n_sq_bound: Option<f64>,
    pub dominated: bool,
    pub distinct_correlations: usize,
}

/// Evaluates the comparison hypothesis sum for a small family with unit diagonals.
pub fn eq_tozero_sum(
    fam: &InterpolationFamily,
    c: &RescalingConstants,
    s: Window,
    h_nodes: usize,
    method: ProbMethod,
) -> Result<EqToZero> {
    let n = fam.n();
    if n > PAIR_SUM_CAP {
        return Err(Error::SizeLimit {
            n,
            cap: PAIR_SUM_CAP,
        });
    }
    Window::new(s.lo, s.hi)?;
    for i in 0..n {
        if (fam.sigma0()[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("family must have unit diagonals"));
        }
    }
    if h_nodes == 0 {
        return Err(Error::invalid("h quadrature needs at least one node"));
    }
    let (a, b) = (c.a_n, c.b_n);
    let window = s.scaled(b);
    let rule: Rule = gauss_legendre(h_nodes).on_interval(0.0, 1.0);
    let delta = fam.delta();
    let mut memo: HashMap<u64, (ProbEstimate, f64)> = HashMap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lemma = 0.0;
    let mut monotone_ok = s.lo >= 0.0;
    let mut a_sq = 0.0;
    for (&h, &w) in rule.nodes.iter().zip(&rule.weights) {
        let sig = fam.interpolate(h);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let weight = delta[(i, j)].abs();
                if weight == 0.0 {
                    continue;
                }
                let rho = sig[(i, j)];
                let entry = match memo.get(&rho.to_bits()) {
                    Some(e) => *e,
                    None => {
                        let e = (
                            bivariate_prob(rho, a, window, method)?,
                            bivariate_bound(rho, a, window)?,
                        );
                        memo.insert(rho.to_bits(), e);
                        e
                    }
                };
                value += w * weight * entry.0.value;
                error += w * weight * entry.0.error;
                lemma += w * weight * entry.1;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let weight = delta[(i, j)].abs();
            if i == j || weight == 0.0 {
                continue;
            }
            let (r0, r1) = (fam.sigma0()[(i, j)], fam.sigma1()[(i, j)]);
            if r0 < 0.0 || r1 < 0.0 {
                monotone_ok = false;
            }
            a_sq += weight * h_raw(r0.max(r1).max(0.0), a);
        }
    }
    let scale = 1.0 / (b * b);
    let value = value * scale;
    let error = error * scale;
    let lemma_bound = lemma * scale;
    let a_n_sq_bound = monotone_ok.then(|| s.len().powi(2) / (2.0 * PI) * a_sq);
    Ok(EqToZero {
        value,
        error,
        lemma_bound,
        a_n_sq_bound,
        dominated: value - 3.0 * error <= lemma_bound
            && a_n_sq_bound.is_none_or(|bnd| value - 3.0 * error <= bnd),
        distinct_correlations: memo.len(),
    })
}
