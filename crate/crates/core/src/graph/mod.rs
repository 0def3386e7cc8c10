//! Simple undirected graphs stored as sorted adjacency lists.
//!
//! A [`Graph`] never holds self-loops or parallel edges, and every edge is
//! stored in both endpoint lists. Measurements live in the [`paths`] and
//! [`clustering`] submodules; the plain-text edge-list format is in
//! [`edgelist`].

pub mod clustering;
pub mod edgelist;
pub mod paths;

use std::collections::VecDeque;

use thiserror::Error;

pub use clustering::{clustering_stats, ClusteringStats};
pub use paths::{path_stats, sampled_apl, shortest_paths_from, PathStats, UNREACHABLE};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node id {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(NodeId, NodeId),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no nodes")]
    Empty,
}

/// Simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    n_edges: usize,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            n_edges: 0,
        }
    }

    /// Builds a graph from unordered node pairs, rejecting self-loops,
    /// out-of-range ids and repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        let mut n_edges = 0;
        for (u, v) in edges {
            check_pair(n, u, v)?;
            adjacency[u].push(v);
            adjacency[v].push(u);
            n_edges += 1;
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let v = w[0];
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
        }
        Ok(Graph { adjacency, n_edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        if u >= self.n_nodes() || v >= self.n_nodes() {
            return false;
        }
        // search the shorter list
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| v <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        check_pair(self.n_nodes(), u, v)?;
        let pos_u = match self.adjacency[u].binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u.min(v), u.max(v))),
            Err(pos) => pos,
        };
        let pos_v = self.adjacency[v]
            .binary_search(&u)
            .expect_err("adjacency lists out of sync");
        self.adjacency[u].insert(pos_u, v);
        self.adjacency[v].insert(pos_v, u);
        self.n_edges += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        check_pair(self.n_nodes(), u, v)?;
        let pos_u = self.adjacency[u]
            .binary_search(&v)
            .map_err(|_| GraphError::MissingEdge(u.min(v), u.max(v)))?;
        let pos_v = self.adjacency[v]
            .binary_search(&u)
            .expect("adjacency lists out of sync");
        self.adjacency[u].remove(pos_u);
        self.adjacency[v].remove(pos_v);
        self.n_edges -= 1;
        Ok(())
    }

    /// Nodes adjacent to both `u` and `v`, ascending.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_common_neighbor(u, v, |w| {
            out.push(w);
            true
        });
        out
    }

    /// Whether `u` and `v` share at least one neighbor.
    pub fn share_neighbor(&self, u: NodeId, v: NodeId) -> bool {
        let mut found = false;
        self.for_each_common_neighbor(u, v, |_| {
            found = true;
            false
        });
        found
    }

    /// Whether the existing edge `(u, v)` closes at least one triangle.
    pub fn edge_in_triangle(&self, u: NodeId, v: NodeId) -> Result<bool, GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::MissingEdge(u.min(v), u.max(v)));
        }
        Ok(self.share_neighbor(u, v))
    }

    /// Merge-intersects the two sorted neighbor lists; `f` returns `false`
    /// to stop early.
    fn for_each_common_neighbor(&self, u: NodeId, v: NodeId, mut f: impl FnMut(NodeId) -> bool) {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if !f(a[i]) {
                        return;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }

    /// True iff a breadth-first search from node 0 reaches every node.
    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::with_capacity(n);
        seen[0] = true;
        queue.push_back(0);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == n
    }

    /// Re-checks every structural invariant. Intended for tests and for
    /// validating graphs assembled outside this module.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let n = self.n_nodes();
        let mut degree_sum = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            degree_sum += list.len();
            for (idx, &v) in list.iter().enumerate() {
                check_pair(n, u, v)?;
                if idx > 0 && list[idx - 1] >= v {
                    return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(GraphError::MissingEdge(v.min(u), v.max(u)));
                }
            }
        }
        if degree_sum != 2 * self.n_edges {
            return Err(GraphError::MissingEdge(0, 0));
        }
        Ok(())
    }
}

fn check_pair(n: usize, u: NodeId, v: NodeId) -> Result<(), GraphError> {
    for node in [u, v] {
        if node >= n {
            return Err(GraphError::NodeOutOfRange { node, n });
        }
    }
    if u == v {
        return Err(GraphError::SelfLoop(u));
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::test_graphs::*;
    use super::*;

    #[test]
    fn builds_triangle() {
        let g = triangle();
        assert_eq!(g.n_edges(), 3);
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        g.check_invariants().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(3, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::NodeOutOfRange { node: 3, n: 3 })
        );
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn eight_cycle() {
        let g = cycle(8);
        assert_eq!(g.n_edges(), 8);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(g.edges().count(), 8);
    }

    #[test]
    fn add_and_remove() {
        let mut g = triangle();
        g.remove_edge(0, 1).unwrap();
        assert_eq!(g.degrees(), vec![1, 1, 2]);
        assert_eq!(g.n_edges(), 2);
        g.check_invariants().unwrap();

        let mut p = path(3);
        p.add_edge(0, 2).unwrap();
        assert_eq!(p, triangle());

        let mut t = triangle();
        assert_eq!(t.add_edge(0, 1), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(
            path(3).remove_edge(0, 2),
            Err(GraphError::MissingEdge(0, 2))
        );
    }

    #[test]
    fn common_neighbor_queries() {
        assert_eq!(triangle().common_neighbors(0, 1), vec![2]);
        let c8 = cycle(8);
        assert_eq!(c8.common_neighbors(0, 2), vec![1]);
        assert!(c8.common_neighbors(0, 4).is_empty());
        assert_eq!(c8.common_neighbors(2, 0), vec![1]);
    }

    #[test]
    fn triangle_membership() {
        let t = triangle();
        for (u, v) in t.edges().collect::<Vec<_>>() {
            assert!(t.edge_in_triangle(u, v).unwrap());
        }
        let c8 = cycle(8);
        for (u, v) in c8.edges().collect::<Vec<_>>() {
            assert!(!c8.edge_in_triangle(u, v).unwrap());
        }
        assert_eq!(
            c8.edge_in_triangle(0, 2),
            Err(GraphError::MissingEdge(0, 2))
        );
        // ring lattice with degree 4
        let ring = Graph::from_edges(
            10,
            (0..10).flat_map(|i| [(i, (i + 1) % 10), (i, (i + 2) % 10)]),
        )
        .unwrap();
        assert!(ring.edge_in_triangle(3, 4).unwrap());
        assert!(ring.common_neighbors(3, 4).contains(&5));
    }

    #[test]
    fn connectivity() {
        assert!(cycle(8).is_connected());
        let two = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!two.is_connected());
        assert!(!Graph::empty(2).is_connected());
        assert!(Graph::empty(1).is_connected());
    }

    #[test]
    fn edges_sorted() {
        let g = Graph::from_edges(5, [(4, 1), (0, 3), (2, 1), (3, 1)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 3), (1, 2), (1, 3), (1, 4)]);
    }
}
