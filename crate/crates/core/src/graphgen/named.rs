use super::RegularGraph;
use crate::error::Result;

/// Complete graph `K_n` (degree `n - 1`).
pub fn complete_graph(n: usize) -> Result<RegularGraph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    RegularGraph::from_edges(n, n.saturating_sub(1), &edges, 0)
}

/// The Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i — i+5`.
pub fn petersen() -> RegularGraph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    let edges: Vec<_> = edges
        .into_iter()
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    RegularGraph::from_edges(10, 3, &edges, 0).expect("Petersen graph is 3-regular")
}

/// Disjoint union of two graphs of equal degree; vertices of `b` are shifted by `a.n()`.
pub fn disjoint_union(a: &RegularGraph, b: &RegularGraph) -> Result<RegularGraph> {
    let shift = a.n();
    let mut edges = a.edges();
    edges.extend(b.edges().into_iter().map(|(u, v)| (u + shift, v + shift)));
    RegularGraph::from_edges(a.n() + b.n(), a.degree(), &edges, 0)
}
