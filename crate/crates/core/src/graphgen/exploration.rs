use std::collections::BTreeSet;

use serde::Serialize;

use super::MultiGraphDraw;

/// Outcome of the breadth-first half-edge exploration from one root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exploration {
    /// First step whose revealed partner was already active; `None` if no
    /// collision happened within the budget.
    pub tau: Option<usize>,
    /// Steps performed.
    pub steps: usize,
    /// Largest active set seen.
    pub max_active: usize,
    /// Whether `|act_t| <= r + (r - 1) t` held after every step.
    pub active_bound_held: bool,
}

/// Number of exploration steps that reveal every half-edge of the vertices
/// at depth `< ell` when no collision occurs: `r·Σ_{j<ell} (r-1)^j`.
pub fn explored_half_edges(degree: usize, ell: u32) -> usize {
    let mut total = 0usize;
    let mut layer = degree;
    for _ in 0..ell {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(degree - 1);
    }
    total
}

/// Runs the half-edge exploration from `root` for at most `budget` steps.
///
/// Step `t` takes the active half-edge `H_t` of the explored vertex closest
/// to the root (ties by vertex index, then half-edge index), reveals its
/// partner `H'_t` and either records a collision (`H'_t` active) or adds the
/// partner's vertex with its remaining half-edges.
pub fn collision_time(draw: &MultiGraphDraw, root: usize, budget: usize) -> Exploration {
    let r = draw.degree();
    let budget = budget.min(draw.n_half_edges());
    let mut depth = vec![u32::MAX; draw.n()];
    let mut active_flag = vec![false; draw.n_half_edges()];
    // (depth, vertex, half-edge)
    let mut active: BTreeSet<(u32, u32, u32)> = BTreeSet::new();
    depth[root] = 0;
    for i in 0..r {
        let h = root * r + i;
        active_flag[h] = true;
        active.insert((0, root as u32, h as u32));
    }
    let mut out = Exploration {
        tau: None,
        steps: 0,
        max_active: active.len(),
        active_bound_held: true,
    };
    for t in 1..=budget {
        let Some((d, _, h)) = active.pop_first() else {
            break;
        };
        let h = h as usize;
        active_flag[h] = false;
        out.steps = t;
        let hp = draw.partner(h);
        if active_flag[hp] {
            out.tau = Some(t);
            break;
        }
        let y = draw.vertex_of(hp);
        debug_assert_eq!(depth[y], u32::MAX);
        depth[y] = d + 1;
        for i in 0..r {
            let h2 = y * r + i;
            if h2 != hp {
                active_flag[h2] = true;
                active.insert((d + 1, y as u32, h2 as u32));
            }
        }
        out.max_active = out.max_active.max(active.len());
        if active.len() > r + (r - 1) * t {
            out.active_bound_held = false;
        }
    }
    debug_assert!(out.active_bound_held);
    out
}
