//! The degree- and clustering-preserving rewiring move.
//!
//! A move `(i, i1, j, j1)` removes edges `(i, i1)` and `(j, j1)` and adds
//! `(i, j)` and `(i1, j1)`. It is valid when both removed edges close no
//! triangle and neither added pair shares a neighbor, so no node gains or
//! loses a triangle and every degree is unchanged.

use std::fmt;

use rand::Rng;

use crate::graph::{Graph, GraphError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RewireMove {
    pub i: NodeId,
    pub i1: NodeId,
    pub j: NodeId,
    pub j1: NodeId,
}

impl RewireMove {
    pub fn new(i: NodeId, i1: NodeId, j: NodeId, j1: NodeId) -> Self {
        RewireMove { i, i1, j, j1 }
    }
}

impl fmt::Display for RewireMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.i, self.i1, self.j, self.j1)
    }
}

/// Whether `m` can be applied to `g` without changing any degree or
/// triangle count and without creating a multi-edge.
pub fn validate_move(g: &Graph, m: &RewireMove) -> bool {
    let RewireMove { i, i1, j, j1 } = *m;
    let ids = [i, i1, j, j1];
    if ids.iter().any(|&x| x >= g.n_nodes()) {
        return false;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            if ids[a] == ids[b] {
                return false;
            }
        }
    }
    g.has_edge(i, i1)
        && g.has_edge(j, j1)
        && !g.has_edge(i, j)
        && !g.has_edge(i1, j1)
        && !g.share_neighbor(i, j)
        && !g.share_neighbor(i, i1)
        && !g.share_neighbor(j, j1)
        && !g.share_neighbor(i1, j1)
}

/// Removes `(i, i1)`, `(j, j1)` and adds `(i, j)`, `(i1, j1)`. Errors,
/// leaving `g` untouched, if the move is not valid.
pub fn apply_move(g: &mut Graph, m: &RewireMove) -> Result<(), GraphError> {
    if !validate_move(g, m) {
        return Err(invalid(g, m));
    }
    swap_edges(g, m);
    Ok(())
}

/// Undoes [`apply_move`]. Errors, leaving `g` untouched, unless `g` holds
/// exactly the edges the move added and none of the ones it removed.
pub fn revert_move(g: &mut Graph, m: &RewireMove) -> Result<(), GraphError> {
    let RewireMove { i, i1, j, j1 } = *m;
    if !g.has_edge(i, j) {
        return Err(GraphError::MissingEdge(i.min(j), i.max(j)));
    }
    if !g.has_edge(i1, j1) {
        return Err(GraphError::MissingEdge(i1.min(j1), i1.max(j1)));
    }
    if g.has_edge(i, i1) {
        return Err(GraphError::DuplicateEdge(i.min(i1), i.max(i1)));
    }
    if g.has_edge(j, j1) {
        return Err(GraphError::DuplicateEdge(j.min(j1), j.max(j1)));
    }
    g.remove_edge(i, j)?;
    g.remove_edge(i1, j1)?;
    g.add_edge(i, i1)?;
    g.add_edge(j, j1)?;
    Ok(())
}

fn swap_edges(g: &mut Graph, m: &RewireMove) {
    let RewireMove { i, i1, j, j1 } = *m;
    g.remove_edge(i, i1).expect("validated");
    g.remove_edge(j, j1).expect("validated");
    g.add_edge(i, j).expect("validated");
    g.add_edge(i1, j1).expect("validated");
}

fn invalid(g: &Graph, m: &RewireMove) -> GraphError {
    let RewireMove { i, i1, j, j1 } = *m;
    let n = g.n_nodes();
    if let Some(&node) = [i, i1, j, j1].iter().find(|&&x| x >= n) {
        return GraphError::NodeOutOfRange { node, n };
    }
    if !g.has_edge(i, i1) {
        return GraphError::MissingEdge(i.min(i1), i.max(i1));
    }
    if !g.has_edge(j, j1) {
        return GraphError::MissingEdge(j.min(j1), j.max(j1));
    }
    // remaining failures are constraint violations on the added pairs
    GraphError::DuplicateEdge(i.min(j), i.max(j))
}

/// Draws a random valid move.
///
/// Each of up to `max_draws` attempts picks `i` and `j` uniformly; if they
/// are distinct, non-adjacent and share no neighbor, one `(i1, j1)` is
/// chosen uniformly among the qualifying pairs. Returns `None` when every
/// attempt fails.
pub fn propose_move<R: Rng>(g: &Graph, rng: &mut R, max_draws: usize) -> Option<RewireMove> {
    let n = g.n_nodes();
    if n < 4 {
        return None;
    }
    let mut pairs = Vec::new();
    for _ in 0..max_draws {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j || g.has_edge(i, j) {
            continue;
        }
        let free_i = triangle_free_neighbors(g, i);
        if free_i.is_empty() {
            continue;
        }
        let free_j = triangle_free_neighbors(g, j);
        if free_j.is_empty() || g.share_neighbor(i, j) {
            continue;
        }
        pairs.clear();
        for &i1 in &free_i {
            for &j1 in &free_j {
                if i1 != j1 && !g.has_edge(i1, j1) && !g.share_neighbor(i1, j1) {
                    pairs.push((i1, j1));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let (i1, j1) = pairs[rng.random_range(0..pairs.len())];
        let m = RewireMove { i, i1, j, j1 };
        debug_assert!(validate_move(g, &m));
        return Some(m);
    }
    None
}

/// Neighbors `u` of `v` such that the edge `(v, u)` closes no triangle.
fn triangle_free_neighbors(g: &Graph, v: NodeId) -> Vec<NodeId> {
    g.neighbors(v)
        .iter()
        .copied()
        .filter(|&u| !g.share_neighbor(v, u))
        .collect()
}
