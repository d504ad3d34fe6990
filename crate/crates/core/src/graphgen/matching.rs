use rand::seq::SliceRandom;
use serde::Serialize;

use super::RegularGraph;
use crate::error::{Error, Result};
use crate::rng;

/// Default cap on configuration-model draws in [`generate_simple`].
pub const DEFAULT_MAX_ATTEMPTS: u32 = 1000;

/// Perfect matching on the `N·r` half-edges of the configuration model.
///
/// Half-edge `x·r + i` is the `i`-th half-edge of vertex `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraphDraw {
    n: usize,
    degree: usize,
    partner: Vec<u32>,
    seed: u64,
}

/// Why a draw is not a simple graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rejection {
    SelfLoop { vertex: usize },
    MultiEdge { u: usize, v: usize },
    DegreeTooSmall { degree: usize },
}

impl MultiGraphDraw {
    pub(crate) fn from_partner(n: usize, degree: usize, partner: Vec<u32>, seed: u64) -> Self {
        debug_assert_eq!(partner.len(), n * degree);
        Self {
            n,
            degree,
            partner,
            seed,
        }
    }

    /// Builds a draw from an explicit pairing, checking it is a fixed-point-free involution.
    pub fn from_pairs(n: usize, degree: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let total = n * degree;
        if pairs.len() * 2 != total {
            return Err(Error::invalid(format!(
                "{} pairs cannot match {total} half-edges",
                pairs.len()
            )));
        }
        let mut partner = vec![u32::MAX; total];
        for &(a, b) in pairs {
            if a >= total || b >= total || a == b {
                return Err(Error::invalid(format!("bad pair ({a}, {b})")));
            }
            if partner[a] != u32::MAX || partner[b] != u32::MAX {
                return Err(Error::invalid(format!(
                    "half-edge matched twice in ({a}, {b})"
                )));
            }
            partner[a] = b as u32;
            partner[b] = a as u32;
        }
        Ok(Self::from_partner(n, degree, partner, 0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_half_edges(&self) -> usize {
        self.partner.len()
    }

    #[inline]
    pub fn partner(&self, h: usize) -> usize {
        self.partner[h] as usize
    }

    #[inline]
    pub fn vertex_of(&self, h: usize) -> usize {
        h / self.degree
    }

    /// Edge multiset `(u, v)` with `u ≤ v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = (0..self.partner.len())
            .filter(|&h| h < self.partner(h))
            .map(|h| {
                let (u, v) = (self.vertex_of(h), self.vertex_of(self.partner(h)));
                (u.min(v), u.max(v))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// True if the matching is an involution without fixed points.
    pub fn is_valid(&self) -> bool {
        self.partner.iter().enumerate().all(|(h, &p)| {
            (p as usize) < self.partner.len()
                && p as usize != h
                && self.partner[p as usize] as usize == h
        })
    }
}

/// Uniform perfect matching on `N·r` half-edges.
///
/// Shuffles the half-edge indices and pairs consecutive entries, which
/// yields every perfect matching with equal probability.
pub fn generate_matching(n: usize, degree: usize, seed: u64) -> Result<MultiGraphDraw> {
    if n == 0 || degree == 0 {
        return Err(Error::invalid("N and r must be positive"));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::invalid(format!("N·r = {} is odd", n * degree)));
    }
    let total = n * degree;
    let mut order: Vec<u32> = (0..total as u32).collect();
    order.shuffle(&mut rng::from_seed(seed));
    let mut partner = vec![0u32; total];
    for pair in order.chunks_exact(2) {
        partner[pair[0] as usize] = pair[1];
        partner[pair[1] as usize] = pair[0];
    }
    Ok(MultiGraphDraw::from_partner(n, degree, partner, seed))
}

/// Accepts the draw iff it has no self-loop and no repeated edge.
pub fn to_simple_graph(draw: &MultiGraphDraw) -> std::result::Result<RegularGraph, Rejection> {
    simple_from_draw(draw, draw.seed, 1)
}

fn simple_from_draw(
    draw: &MultiGraphDraw,
    seed: u64,
    attempts: u32,
) -> std::result::Result<RegularGraph, Rejection> {
    let r = draw.degree;
    if r < 3 {
        return Err(Rejection::DegreeTooSmall { degree: r });
    }
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(draw.n);
    for x in 0..draw.n {
        let mut nbrs: Vec<u32> = (0..r)
            .map(|i| draw.vertex_of(draw.partner(x * r + i)) as u32)
            .collect();
        if nbrs.contains(&(x as u32)) {
            return Err(Rejection::SelfLoop { vertex: x });
        }
        nbrs.sort_unstable();
        if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Rejection::MultiEdge {
                u: x.min(w[0] as usize),
                v: x.max(w[0] as usize),
            });
        }
        lists.push(nbrs);
    }
    Ok(RegularGraph::from_lists(draw.n, r, lists, seed, attempts)
        .expect("simple draw is a regular graph"))
}

/// Draws configuration-model matchings with sub-seeds derived from `seed`
/// until one is simple.
pub fn generate_simple(
    n: usize,
    degree: usize,
    seed: u64,
    max_attempts: u32,
) -> Result<RegularGraph> {
    if max_attempts == 0 {
        return Err(Error::invalid("max_attempts must be at least 1"));
    }
    if degree < 3 {
        return Err(Error::invalid(format!(
            "degree must be at least 3, got {degree}"
        )));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::invalid(format!("N·r = {} is odd", n * degree)));
    }
    if n <= degree {
        return Err(Error::invalid(format!(
            "no simple {degree}-regular graph on {n} vertices"
        )));
    }
    for attempt in 0..max_attempts {
        let sub = rng::stream_seed(seed, rng::DOMAIN_GRAPH_ATTEMPT, attempt as u64);
        let draw = generate_matching(n, degree, sub)?;
        if let Ok(g) = simple_from_draw(&draw, seed, attempt + 1) {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_draw_has_forced_edge_count() {
        let d = generate_matching(2, 3, 11).unwrap();
        assert_eq!(d.n_half_edges(), 6);
        assert_eq!(d.edges().len(), 3);
        assert!(d.is_valid());
        assert!(d.edges().iter().all(|&(u, v)| u <= 1 && v <= 1));
    }

    #[test]
    fn matching_is_deterministic() {
        assert_eq!(
            generate_matching(4, 3, 7).unwrap(),
            generate_matching(4, 3, 7).unwrap()
        );
        assert_ne!(
            generate_matching(4, 3, 7).unwrap(),
            generate_matching(4, 3, 8).unwrap()
        );
    }

    #[test]
    fn odd_half_edge_count_is_rejected() {
        assert!(matches!(
            generate_matching(3, 3, 0),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            generate_simple(3, 3, 0, 10),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn loop_pairing_is_rejected() {
        // h_0(0) <-> h_1(0) is a self-loop at vertex 0
        let d =
            MultiGraphDraw::from_pairs(4, 3, &[(0, 1), (2, 3), (4, 6), (5, 9), (7, 10), (8, 11)])
                .unwrap();
        assert_eq!(to_simple_graph(&d), Err(Rejection::SelfLoop { vertex: 0 }));
    }

    #[test]
    fn k4_pairing_is_accepted() {
        // vertex x owns half-edges 3x..3x+3
        let d =
            MultiGraphDraw::from_pairs(4, 3, &[(0, 3), (1, 6), (2, 9), (4, 7), (5, 10), (8, 11)])
                .unwrap();
        let g = to_simple_graph(&d).unwrap();
        assert_eq!(
            g.edges(),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn exhausted_attempts_report_count() {
        // N = 4, r = 3 succeeds with probability 1296/10395 per draw; one attempt
        // fails for most seeds.
        let failed = (0..50u64)
            .map(|s| generate_simple(4, 3, s, 1))
            .find(|r| r.is_err())
            .unwrap();
        assert!(matches!(
            failed,
            Err(Error::GenerationFailed { attempts: 1 })
        ));
    }
}
