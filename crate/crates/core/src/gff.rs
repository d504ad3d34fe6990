//! Gaussian free field samplers: exact Markov sampling on subtrees of the
//! regular tree, and the zero-average field of a finite graph through an
//! eigen square root of its Green operator.

use std::io::{Read, Write};

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{
    read_binary_header, read_f64_rows, write_binary_header, GreenOperator, TreeGreenParams,
};
use crate::rng::{stream, DOMAIN_REPLICA};

/// Parent sentinel for the root.
pub const ROOT_PARENT: u32 = u32::MAX;

/// First `N` vertices of the breadth-first enumeration of the `r`-regular tree.
///
/// Vertex 0 is the root, vertices `1..=r` its children, and vertex `v > r`
/// has parent `1 + (v - r - 1)/(r - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSubtree {
    degree: usize,
    parent: Vec<u32>,
    depth: Vec<u32>,
}

impl TreeSubtree {
    pub fn new(degree: usize, n: usize) -> Result<Self> {
        if degree < 3 {
            return Err(Error::invalid(format!(
                "tree degree must be at least 3, got {degree}"
            )));
        }
        if n == 0 || n > u32::MAX as usize {
            return Err(Error::invalid(format!(
                "subtree size must be in 1..2^32, got {n}"
            )));
        }
        let mut parent = Vec::with_capacity(n);
        let mut depth = Vec::with_capacity(n);
        for v in 0..n {
            let p = match v {
                0 => ROOT_PARENT,
                v if v <= degree => 0,
                v => (1 + (v - degree - 1) / (degree - 1)) as u32,
            };
            depth.push(if p == ROOT_PARENT {
                0
            } else {
                depth[p as usize] + 1
            });
            parent.push(p);
        }
        Ok(Self {
            degree,
            parent,
            depth,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != ROOT_PARENT).then_some(p as usize)
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn height(&self) -> u32 {
        *self.depth.last().unwrap()
    }

    /// Number of vertices at each depth.
    pub fn depth_profile(&self) -> Vec<usize> {
        let mut prof = vec![0; self.height() as usize + 1];
        for &d in &self.depth {
            prof[d as usize] += 1;
        }
        prof
    }

    /// Tree distance by climbing to the common ancestor.
    pub fn distance(&self, mut x: usize, mut y: usize) -> u32 {
        let mut d = 0;
        while self.depth[x] > self.depth[y] {
            x = self.parent[x] as usize;
            d += 1;
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y] as usize;
            d += 1;
        }
        while x != y {
            x = self.parent[x] as usize;
            y = self.parent[y] as usize;
            d += 2;
        }
        d
    }

    /// Children counts respect the branching bound and parents sit one level up.
    pub fn validate(&self) -> bool {
        let mut children = vec![0usize; self.n()];
        for v in 1..self.n() {
            let p = self.parent[v];
            if p == ROOT_PARENT || p as usize >= v || self.depth[p as usize] + 1 != self.depth[v] {
                return false;
            }
            children[p as usize] += 1;
        }
        self.parent[0] == ROOT_PARENT
            && children[0] <= self.degree
            && children[1..].iter().all(|&c| c < self.degree)
    }
}

pub fn build_subtree(degree: usize, n: usize) -> Result<TreeSubtree> {
    TreeSubtree::new(degree, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    TreeGff,
    GraphZeroAverageGff,
    Iid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub kind: FieldKind,
    /// Replica index inside the replica domain of the master seed.
    pub stream_id: u64,
}

impl FieldSample {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn replica_rng(master_seed: u64, stream_id: u64) -> crate::rng::StreamRng {
    stream(master_seed, DOMAIN_REPLICA, stream_id)
}

/// Tree GFF `ψ = σ_r Z` with `Z_child = ρ Z_parent + √(1-ρ²) ξ`, `ρ = 1/(r-1)`.
pub fn sample_tree_gff_with<R: Rng + ?Sized>(t: &TreeSubtree, rng: &mut R) -> Vec<f64> {
    let params =
        TreeGreenParams::new(t.degree()).expect("subtree degree validated on construction");
    let rho = params.ratio;
    let innov = (1.0 - rho * rho).sqrt();
    let sigma = params.prefactor.sqrt();
    let mut z = Vec::with_capacity(t.n());
    z.push(rng.sample::<f64, _>(StandardNormal));
    for v in 1..t.n() {
        let zp = z[t.parent[v] as usize];
        z.push(rho * zp + innov * rng.sample::<f64, _>(StandardNormal));
    }
    z.iter_mut().for_each(|v| *v *= sigma);
    z
}

pub fn sample_tree_gff(t: &TreeSubtree, master_seed: u64, stream_id: u64) -> FieldSample {
    let values = sample_tree_gff_with(t, &mut replica_rng(master_seed, stream_id));
    FieldSample {
        values,
        kind: FieldKind::TreeGff,
        stream_id,
    }
}

/// Replicas `first..first + count`, in stream order.
pub fn sample_tree_gff_batch(
    t: &TreeSubtree,
    master_seed: u64,
    first: u64,
    count: usize,
) -> Vec<FieldSample> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_tree_gff(t, master_seed, first + i))
        .collect()
}

pub fn sample_iid_field(n: usize, master_seed: u64, stream_id: u64) -> FieldSample {
    let mut rng = replica_rng(master_seed, stream_id);
    let values = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    FieldSample {
        values,
        kind: FieldKind::Iid,
        stream_id,
    }
}

pub fn sample_iid_batch(n: usize, master_seed: u64, first: u64, count: usize) -> Vec<FieldSample> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_iid_field(n, master_seed, first + i))
        .collect()
}

/// Eigen square root `G = B Bᵀ`, `B = V diag(√λ)`.
#[derive(Debug, Clone)]
pub struct SamplerFactor {
    basis: Mat<f64>,
    scales: Vec<f64>,
    zero_mode: usize,
}

/// Eigenvalues in `[-NEGATIVE_CLAMP, 0)` are treated as 0.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

impl SamplerFactor {
    pub fn n(&self) -> usize {
        self.scales.len()
    }

    pub fn basis(&self) -> &Mat<f64> {
        &self.basis
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Index of the null mode in `scales` and the columns of `basis`.
    pub fn zero_mode(&self) -> usize {
        self.zero_mode
    }

    /// `B = V diag(scales)`.
    pub fn square_root(&self) -> Mat<f64> {
        Mat::from_fn(self.n(), self.n(), |i, k| {
            self.basis[(i, k)] * self.scales[k]
        })
    }

    pub fn reconstruction_error(&self, green: &GreenOperator) -> f64 {
        let b = self.square_root();
        let c = &b * b.transpose();
        let n = self.n();
        let mut m = 0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((c[(i, j)] - green.get(i, j)).abs());
            }
        }
        m
    }

    /// `Ψ = Σ_i scale_i ξ_i v_i`; modes are consumed in eigenvalue order.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n();
        let xi: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut out = vec![0.0; n];
        for (k, (&s, &x)) in self.scales.iter().zip(&xi).enumerate() {
            let c = s * x;
            if c == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.basis.col(k).iter()) {
                *o += c * b;
            }
        }
        out
    }
}

pub fn factor_green(green: &GreenOperator) -> Result<SamplerFactor> {
    let n = green.n();
    let evd = green
        .matrix()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let vals = evd.S().column_vector();
    let mut scales = Vec::with_capacity(n);
    let mut zeros = Vec::new();
    for k in 0..n {
        let l = vals[k];
        if l < -NEGATIVE_CLAMP {
            return Err(Error::OperatorQuality(format!(
                "eigenvalue {l:e} below -{NEGATIVE_CLAMP:e}"
            )));
        }
        if l <= NEGATIVE_CLAMP {
            zeros.push(k);
            scales.push(0.0);
        } else {
            scales.push(l.sqrt());
        }
    }
    if zeros.len() != 1 {
        return Err(Error::DegenerateOperator(format!(
            "{} near-zero modes, expected exactly 1",
            zeros.len()
        )));
    }
    Ok(SamplerFactor {
        basis: evd.U().to_owned(),
        scales,
        zero_mode: zeros[0],
    })
}

pub fn sample_graph_gff(f: &SamplerFactor, master_seed: u64, stream_id: u64) -> FieldSample {
    let values = f.sample_with(&mut replica_rng(master_seed, stream_id));
    FieldSample {
        values,
        kind: FieldKind::GraphZeroAverageGff,
        stream_id,
    }
}

/// Replicas `first..first + count`; identical to calling [`sample_graph_gff`] per stream.
pub fn sample_graph_gff_batch(
    f: &SamplerFactor,
    master_seed: u64,
    first: u64,
    count: usize,
) -> Vec<FieldSample> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_graph_gff(f, master_seed, first + i))
        .collect()
}

/// CSV with header `stream_id,x0,…,x{N-1}` and one row per replica.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[FieldSample]) -> Result<()> {
    let n = check_uniform(samples)?;
    let mut header = String::from("stream_id");
    for x in 0..n {
        header.push_str(&format!(",x{x}"));
    }
    writeln!(w, "{header}")?;
    for s in samples {
        let mut line = s.stream_id.to_string();
        for v in &s.values {
            line.push(',');
            line.push_str(&format!("{v:e}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Rows of the CSV written by [`write_samples_csv`] as `(stream_id, values)`.
pub fn read_samples_csv<R: Read>(mut r: R) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    lines
        .next()
        .ok_or_else(|| Error::Parse("empty sample file".into()))?;
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut cells = l.split(',');
            let id = cells
                .next()
                .unwrap_or_default()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("stream id: {e}")))?;
            let values = cells
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("value {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((id, values))
        })
        .collect()
}

/// Binary layout of the Green operator export with one row per replica.
pub fn write_samples_binary<W: Write>(mut w: W, samples: &[FieldSample]) -> Result<()> {
    let n = check_uniform(samples)?;
    write_binary_header(&mut w, n)?;
    for s in samples {
        let bytes: Vec<u8> = s.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_samples_binary<R: Read>(mut r: R) -> Result<Vec<Vec<f64>>> {
    let n = read_binary_header(&mut r)?;
    read_f64_rows(&mut r, n)
}

fn check_uniform(samples: &[FieldSample]) -> Result<usize> {
    let n = samples
        .first()
        .map(FieldSample::n)
        .ok_or_else(|| Error::invalid("no samples to write"))?;
    if samples.iter().any(|s| s.n() != n) {
        return Err(Error::invalid("samples have different lengths"));
    }
    Ok(n)
}
