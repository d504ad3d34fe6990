use std::collections::VecDeque;

use serde::Serialize;

use super::RegularGraph;
use crate::error::{Error, Result};

/// Distance sentinel for unreachable vertices.
pub const UNREACHABLE: u32 = u32::MAX;

/// Breadth-first distances from `source`.
pub fn bfs_distances(g: &RegularGraph, source: usize) -> Result<Vec<u32>> {
    if source >= g.n() {
        return Err(Error::invalid(format!(
            "source {source} out of range for N = {}",
            g.n()
        )));
    }
    let mut dist = vec![UNREACHABLE; g.n()];
    bfs_into(g, source, &mut dist, &mut VecDeque::new());
    Ok(dist)
}

fn bfs_into(g: &RegularGraph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.fill(UNREACHABLE);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u] + 1;
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == UNREACHABLE {
                dist[w] = du;
                queue.push_back(w);
            }
        }
    }
}

/// Dense all-pairs distance table, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.data[x * self.n..(x + 1) * self.n]
    }

    /// Largest finite distance; `None` if some pair is disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut max = 0;
        for &d in &self.data {
            if d == UNREACHABLE {
                return None;
            }
            max = max.max(d);
        }
        Some(max)
    }
}

/// BFS from every vertex.
pub fn all_pairs_distances(g: &RegularGraph) -> DistanceMatrix {
    let n = g.n();
    let mut data = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for (x, row) in data.chunks_exact_mut(n).enumerate() {
        bfs_into(g, x, row, &mut queue);
    }
    DistanceMatrix { n, data }
}

/// Classification of vertices by the shape of their radius-`ell` ball.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexCensus {
    pub ell: u32,
    pub good_flags: Vec<bool>,
    pub bad_count: usize,
}

impl VertexCensus {
    pub fn good_count(&self) -> usize {
        self.good_flags.len() - self.bad_count
    }

    pub fn good_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.good_flags
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(|(x, _)| x)
    }
}

/// Which edges of the radius-`ell` ball are examined for cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallRule {
    /// The induced ball: every edge between two vertices within distance `ell`.
    #[default]
    Induced,
    /// Only edges with an endpoint at depth `< ell`; edges joining two
    /// depth-`ell` vertices are ignored. This is the part of the ball seen by
    /// the first `S_ell` steps of the half-edge exploration.
    Open,
}

/// Marks each vertex `ell`-good or `ell`-bad under [`BallRule::Induced`].
///
/// A vertex is `ell`-good when its induced radius-`ell` ball is a tree, hence
/// rooted-isomorphic to the depth-`ell` ball of the regular tree.
pub fn vertex_census(g: &RegularGraph, ell: u32) -> VertexCensus {
    vertex_census_with(g, ell, BallRule::Induced)
}

pub fn vertex_census_with(g: &RegularGraph, ell: u32, rule: BallRule) -> VertexCensus {
    let n = g.n();
    let mut good_flags = vec![true; n];
    if ell > 0 {
        let mut stamp = vec![usize::MAX; n];
        let mut depth = vec![0u32; n];
        let mut parent = vec![0u32; n];
        let mut queue = VecDeque::new();
        for (x, flag) in good_flags.iter_mut().enumerate() {
            *flag = ball_is_tree(
                g,
                x,
                ell,
                rule,
                &mut stamp,
                &mut depth,
                &mut parent,
                &mut queue,
            );
        }
    }
    let bad_count = good_flags.iter().filter(|&&f| !f).count();
    VertexCensus {
        ell,
        good_flags,
        bad_count,
    }
}

#[allow(clippy::too_many_arguments)]
fn ball_is_tree(
    g: &RegularGraph,
    root: usize,
    ell: u32,
    rule: BallRule,
    stamp: &mut [usize],
    depth: &mut [u32],
    parent: &mut [u32],
    queue: &mut VecDeque<usize>,
) -> bool {
    queue.clear();
    stamp[root] = root;
    depth[root] = 0;
    parent[root] = u32::MAX;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        let boundary = depth[u] >= ell;
        if boundary && rule == BallRule::Open {
            continue;
        }
        for &w in g.neighbors(u) {
            if w == parent[u] {
                continue;
            }
            let w = w as usize;
            if stamp[w] == root {
                return false;
            }
            if boundary {
                continue;
            }
            stamp[w] = root;
            depth[w] = depth[u] + 1;
            parent[w] = u as u32;
            queue.push_back(w);
        }
    }
    true
}

/// Vertices within distance `radius` of `root`, in BFS order.
pub(crate) fn ball(
    g: &RegularGraph,
    root: usize,
    radius: u32,
    stamp: &mut [usize],
    depth: &mut [u32],
) -> Vec<usize> {
    let mut out = vec![root];
    stamp[root] = root;
    depth[root] = 0;
    let mut head = 0;
    while head < out.len() {
        let u = out[head];
        head += 1;
        if depth[u] >= radius {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if stamp[w] != root {
                stamp[w] = root;
                depth[w] = depth[u] + 1;
                out.push(w);
            }
        }
    }
    out
}
