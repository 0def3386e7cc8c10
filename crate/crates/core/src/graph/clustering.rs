use super::Graph;

/// Per-node triangle counts and local clustering coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringStats {
    /// `E_i`: edges among the neighbors of node `i`.
    pub per_node_triangles: Vec<u64>,
    /// `c_i = 2 E_i / (k_i (k_i - 1))`, or 0 when `k_i < 2`.
    pub per_node_coefficient: Vec<f64>,
    /// Mean of `c_i` over all nodes.
    pub global: f64,
}

impl ClusteringStats {
    /// Number of distinct triangles in the graph.
    pub fn triangle_count(&self) -> u64 {
        self.per_node_triangles.iter().sum::<u64>() / 3
    }
}

pub fn clustering_stats(g: &Graph) -> ClusteringStats {
    let n = g.n_nodes();
    let per_node_triangles: Vec<u64> = (0..n).map(|i| node_triangles(g, i)).collect();
    let per_node_coefficient: Vec<f64> = per_node_triangles
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let k = g.degree(i) as f64;
            if k < 2.0 {
                0.0
            } else {
                2.0 * e as f64 / (k * (k - 1.0))
            }
        })
        .collect();
    let global = if n == 0 {
        0.0
    } else {
        per_node_coefficient.iter().sum::<f64>() / n as f64
    };
    ClusteringStats {
        per_node_triangles,
        per_node_coefficient,
        global,
    }
}

/// `E_i` for a single node.
pub fn node_triangles(g: &Graph, i: usize) -> u64 {
    let nbrs = g.neighbors(i);
    let mut count = 0u64;
    for (a, &u) in nbrs.iter().enumerate() {
        for &v in &nbrs[a + 1..] {
            if g.has_edge(u, v) {
                count += 1;
            }
        }
    }
    count
}
