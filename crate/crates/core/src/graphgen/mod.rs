//! Random regular graphs from the configuration model and their local and
//! global structure.

mod census;
mod exploration;
mod io;
mod matching;
mod named;
mod report;
mod spectral;
mod tail;

pub(crate) use census::ball;
pub use census::{
    all_pairs_distances, bfs_distances, vertex_census, vertex_census_with, BallRule,
    DistanceMatrix, VertexCensus, UNREACHABLE,
};
pub use exploration::{collision_time, explored_half_edges, Exploration};
pub use io::{read_edge_list, write_edge_list};
pub use matching::{
    generate_matching, generate_simple, to_simple_graph, MultiGraphDraw, Rejection,
    DEFAULT_MAX_ATTEMPTS,
};
pub use named::{complete_graph, disjoint_union, petersen};
pub use report::{structural_report, ChecksPassed, GraphRegularityReport, RegularityParams};
pub use spectral::{second_adjacency_eigenvalue, spectral_gap, DENSE_EIGEN_CAP};
pub use tail::{bad_tail_check, BadTailReport, TailPoint};

use faer::Mat;

use crate::error::{Error, Result};

/// Simple `r`-regular graph on `N` vertices stored as flat sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    degree: usize,
    adjacency: Vec<u32>,
    seed: u64,
    attempts: u32,
}

impl RegularGraph {
    /// Builds a graph from an edge list, checking regularity and simplicity.
    pub fn from_edges(
        n: usize,
        degree: usize,
        edges: &[(usize, usize)],
        seed: u64,
    ) -> Result<Self> {
        if degree < 3 {
            return Err(Error::invalid(format!(
                "degree must be at least 3, got {degree}"
            )));
        }
        if n == 0 || !(n * degree).is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "N·r must be even and N positive (N={n}, r={degree})"
            )));
        }
        if edges.len() != n * degree / 2 {
            return Err(Error::invalid(format!(
                "expected {} edges for a {degree}-regular graph on {n} vertices, got {}",
                n * degree / 2,
                edges.len()
            )));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(degree); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        Self::from_lists(n, degree, lists, seed, 0)
    }

    pub(crate) fn from_lists(
        n: usize,
        degree: usize,
        lists: Vec<Vec<u32>>,
        seed: u64,
        attempts: u32,
    ) -> Result<Self> {
        let mut adjacency = Vec::with_capacity(n * degree);
        for (x, mut nbrs) in lists.into_iter().enumerate() {
            if nbrs.len() != degree {
                return Err(Error::invalid(format!(
                    "vertex {x} has degree {}",
                    nbrs.len()
                )));
            }
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("repeated edge at vertex {x}")));
            }
            adjacency.extend_from_slice(&nbrs);
        }
        Ok(Self {
            n,
            degree,
            adjacency,
            seed,
            attempts,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Seed the graph was generated from (0 for hand-built graphs).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of configuration-model draws used; 0 for hand-built graphs.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    #[inline]
    pub fn neighbors(&self, x: usize) -> &[u32] {
        &self.adjacency[x * self.degree..(x + 1) * self.degree]
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n * self.degree / 2);
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                if (u as u32) < v {
                    out.push((u, v as usize));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Component label per vertex, labels in order of first appearance.
    pub fn components(&self) -> (usize, Vec<u32>) {
        let mut label = vec![u32::MAX; self.n];
        let mut count = 0u32;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if label[w as usize] == u32::MAX {
                        label[w as usize] = count;
                        stack.push(w as usize);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 == 1
    }

    /// Dense adjacency matrix.
    pub fn adjacency_matrix(&self) -> Mat<f64> {
        let mut a = Mat::<f64>::zeros(self.n, self.n);
        for x in 0..self.n {
            for &y in self.neighbors(x) {
                a[(x, y as usize)] = 1.0;
            }
        }
        a
    }

    /// `y ← (A/r) x`.
    pub fn apply_walk(&self, x: &[f64], y: &mut [f64]) {
        let inv = 1.0 / self.degree as f64;
        for (u, out) in y.iter_mut().enumerate() {
            *out = self
                .neighbors(u)
                .iter()
                .map(|&w| x[w as usize])
                .sum::<f64>()
                * inv;
        }
    }

    /// Canonical half-edge pairing realizing this graph: half-edge `i` of `x`
    /// points at its `i`-th sorted neighbor.
    pub fn to_draw(&self) -> MultiGraphDraw {
        let r = self.degree;
        let mut partner = vec![0u32; self.n * r];
        for x in 0..self.n {
            for (i, &y) in self.neighbors(x).iter().enumerate() {
                let j = self
                    .neighbors(y as usize)
                    .binary_search(&(x as u32))
                    .expect("adjacency is symmetric");
                partner[x * r + i] = (y as usize * r + j) as u32;
            }
        }
        MultiGraphDraw::from_partner(self.n, r, partner, self.seed)
    }

    /// Checks the structural invariants; used by tests and loaders.
    pub fn validate(&self) -> Result<()> {
        if !(self.n * self.degree).is_multiple_of(2) {
            return Err(Error::invalid("N·r odd"));
        }
        for x in 0..self.n {
            let nb = self.neighbors(x);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "vertex {x}: neighbor list not strictly sorted"
                )));
            }
            for &y in nb {
                if y as usize == x {
                    return Err(Error::invalid(format!("self-loop at {x}")));
                }
                if !self.has_edge(y as usize, x) {
                    return Err(Error::invalid(format!("asymmetric edge {x} -> {y}")));
                }
            }
        }
        Ok(())
    }
}
