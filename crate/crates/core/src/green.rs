//! Green functions: the closed form on the regular tree and the
//! zero-average Green function of a finite regular graph.

use std::io::{Read, Write};

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphgen::{
    ball, spectral_gap, DistanceMatrix, RegularGraph, VertexCensus, UNREACHABLE,
};

/// Largest `N` built with a dense factorization.
pub const DENSE_GREEN_CAP: usize = 4096;
/// Largest `N` for the dense matrix exponential.
pub const HEAT_KERNEL_CAP: usize = 512;
/// Residual contract for the iterative column solves.
pub const CG_TOLERANCE: f64 = 1e-9;

/// Closed-form tree Green function parameters: `g(d) = prefactor · ratio^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeGreenParams {
    pub degree: usize,
    /// `σ_r² = (r-1)/(r-2)`
    pub prefactor: f64,
    /// `1/(r-1)`
    pub ratio: f64,
}

impl TreeGreenParams {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 3 {
            return Err(Error::invalid(format!(
                "tree degree must be at least 3, got {degree}"
            )));
        }
        let r = degree as f64;
        Ok(Self {
            degree,
            prefactor: (r - 1.0) / (r - 2.0),
            ratio: 1.0 / (r - 1.0),
        })
    }

    #[inline]
    pub fn at(&self, d: u32) -> f64 {
        if d > i32::MAX as u32 {
            return 0.0;
        }
        self.prefactor * self.ratio.powi(d as i32)
    }
}

/// Expected visits to `y` of simple random walk from `x` on the `r`-regular
/// tree, with `d = d(x, y)`: `(r-1)/(r-2) · (r-1)^{-d}`.
pub fn tree_green(degree: usize, d: u32) -> Result<f64> {
    Ok(TreeGreenParams::new(degree)?.at(d))
}

/// Monte Carlo estimate of the expected number of root visits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitEstimate {
    pub walks: usize,
    pub mean: f64,
    pub std_error: f64,
}

const WALK_CHUNK: usize = 10_000;

/// Expected visits to the root (time 0 included) of the discrete simple
/// random walk on the `degree`-regular tree, killed on reaching `depth`.
///
/// Only the distance to the root is simulated: from the root every step goes
/// out, elsewhere a step goes in with probability `1/r`. Walk chunks use
/// independent streams, so the result does not depend on the thread count.
pub fn tree_walk_root_visits(
    degree: usize,
    depth: u32,
    walks: usize,
    seed: u64,
) -> Result<VisitEstimate> {
    use rand::Rng;
    if degree < 3 {
        return Err(Error::invalid("degree must be at least 3"));
    }
    if depth == 0 || walks < 2 {
        return Err(Error::invalid("need depth >= 1 and at least two walks"));
    }
    let p_in = 1.0 / degree as f64;
    let chunks = walks.div_ceil(WALK_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = crate::rng::stream(seed, crate::rng::DOMAIN_MONTE_CARLO, c as u64);
            let count = WALK_CHUNK.min(walks - c * WALK_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let (mut d, mut visits) = (0u32, 1u64);
                loop {
                    if d == 0 || !rng.random_bool(p_in) {
                        d += 1;
                        if d == depth {
                            break;
                        }
                    } else {
                        d -= 1;
                        visits += u64::from(d == 0);
                    }
                }
                let v = visits as f64;
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = walks as f64;
    let mean = s / nf;
    let var = (s2 - nf * mean * mean) / (nf - 1.0);
    Ok(VisitEstimate {
        walks,
        mean,
        std_error: (var / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildMethod {
    ShiftInvert,
    Eigendecomposition,
    ConjugateGradient,
    TimeQuadrature,
    Loaded,
}

/// Symmetric `N × N` zero-average Green matrix.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    matrix: Mat<f64>,
    build_method: BuildMethod,
}

/// Measured deviations from the operator invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenInvariants {
    pub max_asymmetry: f64,
    pub max_row_sum: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub near_zero_modes: usize,
}

impl GreenInvariants {
    /// Symmetry to 1e-10, zero row sums to 1e-8, PSD to -1e-9 with a single null mode.
    pub fn hold(&self) -> bool {
        self.max_asymmetry <= 1e-10
            && self.max_row_sum <= 1e-8
            && self.min_eigenvalue >= -1e-9
            && self.near_zero_modes == 1
    }
}

/// JSON summary of an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSummary {
    pub n: usize,
    pub build_method: BuildMethod,
    pub diag_min: f64,
    pub diag_max: f64,
    pub diag_mean: f64,
    pub offdiag_min: f64,
    pub offdiag_max: f64,
    pub eig_min: Option<f64>,
    pub eig_max: Option<f64>,
}

const MAGIC: &[u8; 4] = b"GAGF";

impl GreenOperator {
    pub fn from_matrix(matrix: Mat<f64>, build_method: BuildMethod) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("Green matrix must be square"));
        }
        Ok(Self {
            matrix,
            build_method,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn build_method(&self) -> BuildMethod {
        self.build_method
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.matrix[(i, i)]).collect()
    }

    /// Largest entrywise difference from another operator.
    pub fn max_abs_diff(&self, other: &GreenOperator) -> f64 {
        let n = self.n();
        let mut m = 0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.matrix[(i, j)] - other.matrix[(i, j)]).abs());
            }
        }
        m
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))
    }

    pub fn check_invariants(&self) -> Result<GreenInvariants> {
        let n = self.n();
        let mut max_asymmetry = 0f64;
        let mut max_row_sum = 0f64;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.matrix[(i, j)];
                max_asymmetry =
                    max_asymmetry.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
            max_row_sum = max_row_sum.max(s.abs());
        }
        let eig = self.eigenvalues()?;
        let near_zero_modes = eig.iter().filter(|v| v.abs() <= 1e-9).count();
        Ok(GreenInvariants {
            max_asymmetry,
            max_row_sum,
            min_eigenvalue: eig[0],
            max_eigenvalue: eig[n - 1],
            near_zero_modes,
        })
    }

    pub fn summary(&self, with_spectrum: bool) -> Result<GreenSummary> {
        let n = self.n();
        let diag = self.diagonal();
        let mut offdiag_min = f64::INFINITY;
        let mut offdiag_max = f64::NEG_INFINITY;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    offdiag_min = offdiag_min.min(self.matrix[(i, j)]);
                    offdiag_max = offdiag_max.max(self.matrix[(i, j)]);
                }
            }
        }
        let (eig_min, eig_max) = if with_spectrum {
            let e = self.eigenvalues()?;
            (Some(e[0]), Some(e[n - 1]))
        } else {
            (None, None)
        };
        Ok(GreenSummary {
            n,
            build_method: self.build_method,
            diag_min: diag.iter().copied().fold(f64::INFINITY, f64::min),
            diag_max: diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            diag_mean: diag.iter().sum::<f64>() / n as f64,
            offdiag_min,
            offdiag_max,
            eig_min,
            eig_max,
        })
    }

    /// Binary export: `GAGF`, `u32 N`, `u32 0`, then `N²` little-endian `f64` row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n();
        write_binary_header(&mut w, n)?;
        let mut buf = Vec::with_capacity(n * 8);
        for x in 0..n {
            buf.clear();
            for y in 0..n {
                buf.extend_from_slice(&self.matrix[(x, y)].to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let n = read_binary_header(&mut r)?;
        let rows = read_f64_rows(&mut r, n)?;
        if rows.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} rows, found {}",
                rows.len()
            )));
        }
        let m = Mat::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(m, BuildMethod::Loaded)
    }
}

pub(crate) fn write_binary_header<W: Write>(w: &mut W, n: usize) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_binary_header<R: Read>(r: &mut R) -> Result<usize> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Parse("bad magic, expected GAGF".into()));
    }
    Ok(u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize)
}

/// Reads rows of `n` floats until end of input.
pub(crate) fn read_f64_rows<R: Read>(r: &mut R, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if n == 0 || bytes.len() % (8 * n) != 0 {
        return Err(Error::Parse(format!(
            "payload of {} bytes is not a whole number of rows",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8 * n)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect())
}

fn check_connected(g: &RegularGraph) -> Result<()> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(Error::SingularOperator(format!(
            "graph has {} components; the zero-average Green function needs a connected graph",
            g.components().0
        )))
    }
}

/// `Π + I - A/r`, with `Π` the averaging projector.
fn shifted_laplacian(g: &RegularGraph) -> Mat<f64> {
    let n = g.n();
    let inv_n = 1.0 / n as f64;
    let inv_r = 1.0 / g.degree() as f64;
    let mut m = Mat::from_fn(n, n, |i, j| if i == j { 1.0 + inv_n } else { inv_n });
    for x in 0..n {
        for &y in g.neighbors(x) {
            m[(x, y as usize)] -= inv_r;
        }
    }
    m
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Zero-average Green function `G = (Π + I - A/r)^{-1} - Π`.
///
/// Dense Cholesky inverse up to [`DENSE_GREEN_CAP`], conjugate-gradient
/// column solves above it.
pub fn zero_average_green(g: &RegularGraph) -> Result<GreenOperator> {
    if g.n() > DENSE_GREEN_CAP {
        return zero_average_green_cg(g, CG_TOLERANCE);
    }
    check_connected(g)?;
    let n = g.n();
    let m = shifted_laplacian(g);
    let llt = m
        .llt(Side::Lower)
        .map_err(|e| Error::SingularOperator(format!("Cholesky failed: {e:?}")))?;
    let mut inv = llt.inverse();
    let inv_n = 1.0 / n as f64;
    for j in 0..n {
        for i in 0..n {
            inv[(i, j)] -= inv_n;
        }
    }
    symmetrize(&mut inv);
    GreenOperator::from_matrix(inv, BuildMethod::ShiftInvert)
}

/// Zero-average Green function from the spectral decomposition of `I - A/r`:
/// `G = Σ_{λ_i > 0} v_i v_iᵀ / λ_i`.
pub fn zero_average_green_eigen(g: &RegularGraph) -> Result<GreenOperator> {
    let n = g.n();
    let inv_r = 1.0 / g.degree() as f64;
    let mut lw = Mat::<f64>::identity(n, n);
    for x in 0..n {
        for &y in g.neighbors(x) {
            lw[(x, y as usize)] -= inv_r;
        }
    }
    let evd = lw
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector();
    let zero_modes = (0..n).filter(|&i| vals[i].abs() <= 1e-9).count();
    if zero_modes != 1 {
        return Err(Error::SingularOperator(format!(
            "{zero_modes} zero modes in I - A/r"
        )));
    }
    let u = evd.U();
    let w = Mat::from_fn(n, n, |i, k| {
        let lambda = vals[k];
        if lambda.abs() <= 1e-9 {
            0.0
        } else {
            u[(i, k)] / lambda.sqrt()
        }
    });
    let mut m = &w * w.transpose();
    symmetrize(&mut m);
    GreenOperator::from_matrix(m, BuildMethod::Eigendecomposition)
}

/// Column-by-column conjugate-gradient build; every column solve reaches a
/// relative residual below `tol`.
pub fn zero_average_green_cg(g: &RegularGraph, tol: f64) -> Result<GreenOperator> {
    check_connected(g)?;
    let n = g.n();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| green_column_cg(g, j, tol))
        .collect::<Result<_>>()?;
    let mut m = Mat::from_fn(n, n, |i, j| columns[j][i]);
    symmetrize(&mut m);
    GreenOperator::from_matrix(m, BuildMethod::ConjugateGradient)
}

/// Column `G e_j` by conjugate gradients on `Π + I - A/r`.
pub fn green_column_cg(g: &RegularGraph, j: usize, tol: f64) -> Result<Vec<f64>> {
    let n = g.n();
    let inv_n = 1.0 / n as f64;
    let apply = |v: &[f64], out: &mut [f64], tmp: &mut [f64]| {
        g.apply_walk(v, tmp);
        let mean = v.iter().sum::<f64>() * inv_n;
        for i in 0..n {
            out[i] = mean + v[i] - tmp[i];
        }
    };
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    r[j] = 1.0;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut rr = 1.0;
    for _ in 0..10 * n + 100 {
        apply(&p, &mut ap, &mut tmp);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new.sqrt() <= tol {
            x.iter_mut().for_each(|v| *v -= inv_n);
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::Numerical(format!(
        "CG did not reach residual {tol} for column {j}"
    )))
}

/// Comparison of the graph Green function with the tree one around good vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum GreenVsTree {
    NoGoodVertices,
    Measured {
        max_error: f64,
        worst_pair: (usize, usize),
        worst_distance: u32,
        n_good: usize,
        n_pairs: usize,
        /// `-ln(max_error) / ln N`
        fitted_exponent: f64,
    },
}

impl GreenVsTree {
    pub fn max_error(&self) -> Option<f64> {
        match self {
            GreenVsTree::NoGoodVertices => None,
            GreenVsTree::Measured { max_error, .. } => Some(*max_error),
        }
    }
}

/// Max of `|G(x,y) - g(d(x,y))|` over good `x` and `y` within `ell0` of `x`.
pub fn green_vs_tree(
    g: &RegularGraph,
    green: &GreenOperator,
    census: &VertexCensus,
    ell0: u32,
) -> Result<GreenVsTree> {
    if census.ell < ell0 + 1 {
        return Err(Error::invalid(format!(
            "census radius {} must be at least ell0 + 1 = {}",
            census.ell,
            ell0 + 1
        )));
    }
    if census.good_flags.len() != g.n() || green.n() != g.n() {
        return Err(Error::invalid("census, operator and graph sizes differ"));
    }
    let tree = TreeGreenParams::new(g.degree())?;
    let mut stamp = vec![usize::MAX; g.n()];
    let mut depth = vec![0u32; g.n()];
    let mut best = (f64::NEG_INFINITY, (0, 0), 0);
    let mut n_good = 0;
    let mut n_pairs = 0;
    for x in census.good_vertices() {
        n_good += 1;
        for y in ball(g, x, ell0, &mut stamp, &mut depth) {
            let d = depth[y];
            let err = (green.get(x, y) - tree.at(d)).abs();
            n_pairs += 1;
            if err > best.0 {
                best = (err, (x, y), d);
            }
        }
    }
    if n_good == 0 {
        return Ok(GreenVsTree::NoGoodVertices);
    }
    Ok(GreenVsTree::Measured {
        max_error: best.0,
        worst_pair: best.1,
        worst_distance: best.2,
        n_good,
        n_pairs,
        fitted_exponent: -best.0.ln() / (g.n() as f64).ln(),
    })
}

/// Outcome of `G(x,y) ≤ K₁(r-1)^{-d(x,y)} ∨ N^{-k₃}` over all ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenBoundCheck {
    pub holds: bool,
    pub violations: usize,
    /// Pair maximizing `G(x,y) - bound(x,y)`; reported whether or not it violates.
    pub worst_pair: (usize, usize),
    pub worst_excess: f64,
}

impl GreenBoundCheck {
    /// The maximally violating pair, if any pair violates.
    pub fn violating_pair(&self) -> Option<(usize, usize)> {
        (!self.holds).then_some(self.worst_pair)
    }
}

fn pair_bound(big_k1: f64, ratio: f64, d: u32, floor: f64) -> f64 {
    let decay = if d == UNREACHABLE {
        0.0
    } else {
        big_k1 * ratio.powi(d as i32)
    };
    decay.max(floor)
}

pub fn green_upper_bound(
    g: &RegularGraph,
    green: &GreenOperator,
    dist: &DistanceMatrix,
    big_k1: f64,
    k3: f64,
) -> Result<GreenBoundCheck> {
    let n = g.n();
    if green.n() != n || dist.n() != n {
        return Err(Error::invalid(
            "operator, distance table and graph sizes differ",
        ));
    }
    let ratio = 1.0 / (g.degree() as f64 - 1.0);
    let floor = (n as f64).powf(-k3);
    let mut violations = 0;
    let mut worst = (f64::NEG_INFINITY, (0, 0));
    for x in 0..n {
        for y in 0..n {
            let excess = green.get(x, y) - pair_bound(big_k1, ratio, dist.get(x, y), floor);
            if excess > 0.0 {
                violations += 1;
            }
            if excess > worst.0 {
                worst = (excess, (x, y));
            }
        }
    }
    Ok(GreenBoundCheck {
        holds: violations == 0,
        violations,
        worst_pair: worst.1,
        worst_excess: worst.0,
    })
}

/// Largest `k₃` for which the Green bound holds with prefactor `K₁`:
/// the minimum of `-ln G(x,y) / ln N` over pairs exceeding `K₁(r-1)^{-d}`.
/// Infinite when the decay term alone already dominates every pair; negative
/// (no valid `k₃`) when some such pair has `G(x,y) > 1`.
pub fn fit_k3(g: &RegularGraph, green: &GreenOperator, dist: &DistanceMatrix, big_k1: f64) -> f64 {
    let n = g.n();
    let ratio = 1.0 / (g.degree() as f64 - 1.0);
    let ln_n = (n as f64).ln();
    let mut k3 = f64::INFINITY;
    for x in 0..n {
        for y in 0..n {
            let v = green.get(x, y);
            if v > pair_bound(big_k1, ratio, dist.get(x, y), 0.0) {
                k3 = k3.min(-v.ln() / ln_n);
            }
        }
    }
    k3
}

/// Continuous-time transition matrix `e^{tQ}`, `Q = A/r - I`.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    t: f64,
    kappa: f64,
    matrix: Mat<f64>,
}

/// Deviation of one row of the heat kernel from the uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelDeviation {
    pub t: f64,
    pub x: usize,
    pub deviation: f64,
    /// `e^{-κt}`
    pub bound: f64,
    pub kappa: f64,
    pub holds: bool,
}

impl HeatKernel {
    /// Scaling and squaring with a degree-20 Taylor polynomial on `tQ/2^s`, `‖tQ/2^s‖_∞ ≤ 1/2`.
    pub fn new(g: &RegularGraph, t: f64) -> Result<Self> {
        let n = g.n();
        if n > HEAT_KERNEL_CAP {
            return Err(Error::SizeLimit {
                n,
                cap: HEAT_KERNEL_CAP,
            });
        }
        if t.is_nan() || t < 0.0 || !t.is_finite() {
            return Err(Error::invalid(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        let kappa = spectral_gap(g)?;
        let matrix = expm_generator(g, t);
        Ok(Self { t, kappa, matrix })
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn deviation(&self, x: usize) -> HeatKernelDeviation {
        let n = self.matrix.nrows();
        let inv_n = 1.0 / n as f64;
        let deviation = (0..n)
            .map(|y| (self.matrix[(x, y)] - inv_n).abs())
            .fold(0.0, f64::max);
        let bound = (-self.kappa * self.t).exp();
        HeatKernelDeviation {
            t: self.t,
            x,
            deviation,
            bound,
            kappa: self.kappa,
            holds: deviation <= bound,
        }
    }
}

pub(crate) fn expm_generator(g: &RegularGraph, t: f64) -> Mat<f64> {
    let n = g.n();
    let inv_r = 1.0 / g.degree() as f64;
    // ‖Q‖_∞ = 2
    let norm = 2.0 * t;
    let squarings = if norm <= 0.5 {
        0
    } else {
        (norm / 0.5).log2().ceil() as u32
    };
    let scale = t / f64::powi(2.0, squarings as i32);
    let mut b = Mat::<f64>::from_fn(n, n, |i, j| if i == j { -scale } else { 0.0 });
    for x in 0..n {
        for &y in g.neighbors(x) {
            b[(x, y as usize)] += scale * inv_r;
        }
    }
    let mut result = Mat::<f64>::identity(n, n);
    let mut term = Mat::<f64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &b;
        let c = 1.0 / k as f64;
        for j in 0..n {
            for i in 0..n {
                term[(i, j)] *= c;
            }
        }
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Zero-average Green function as the occupation-time integral
/// `∫_0^T (e^{tQ} - Π) dt` with `T = 60/κ`.
///
/// The integral is split into unit panels. With `D_k = e^{kQ} - Π` and
/// `M = ∫_0^1 e^{sQ} ds` (12-point Gauss-Legendre), panel `k` contributes
/// `D_k M` and `D_{k+1} = D_k e^Q`. The truncated tail is below `e^{-60}/κ`.
pub fn zero_average_green_time_quadrature(g: &RegularGraph) -> Result<GreenOperator> {
    let n = g.n();
    if n > HEAT_KERNEL_CAP {
        return Err(Error::SizeLimit {
            n,
            cap: HEAT_KERNEL_CAP,
        });
    }
    check_connected(g)?;
    let kappa = spectral_gap(g)?;
    let panels = (60.0 / kappa).ceil() as usize;
    let rule = crate::quadrature::gauss_legendre(12).on_interval(0.0, 1.0);
    let mut m = Mat::<f64>::zeros(n, n);
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let e = expm_generator(g, s);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] += w * e[(i, j)];
            }
        }
    }
    let step = expm_generator(g, 1.0);
    let inv_n = 1.0 / n as f64;
    let mut d = Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 - inv_n } else { -inv_n });
    let mut acc = Mat::<f64>::zeros(n, n);
    for _ in 0..panels {
        acc += &d * &m;
        d = &d * &step;
    }
    symmetrize(&mut acc);
    GreenOperator::from_matrix(acc, BuildMethod::TimeQuadrature)
}

/// `max_y |P_x(X_t = y) - 1/N|` together with the mixing bound `e^{-κt}`.
pub fn heat_kernel_deviation(g: &RegularGraph, t: f64, x: usize) -> Result<HeatKernelDeviation> {
    if x >= g.n() {
        return Err(Error::invalid(format!("vertex {x} out of range")));
    }
    Ok(HeatKernel::new(g, t)?.deviation(x))
}
