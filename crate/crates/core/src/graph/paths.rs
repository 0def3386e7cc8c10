//! Unweighted shortest paths.
//!
//! All-pairs statistics use a bit-parallel breadth-first search that
//! advances 256 sources per sweep over the adjacency lists: each node
//! carries one bit per source for "visited" and "in frontier". The result
//! is exact; [`shortest_paths_from`] is the plain single-source BFS.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use super::{Graph, GraphError, NodeId};

/// Distance reported for nodes that a search cannot reach.
pub const UNREACHABLE: usize = usize::MAX;

const WORDS: usize = 4;
const BLOCK: usize = WORDS * 64;

type Lanes = [u64; WORDS];

/// Shortest-path summary of a connected graph over ordered node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    /// Mean shortest-path length over the `N(N-1)` ordered pairs.
    pub apl: f64,
    /// `P(d)` for every distance that occurs.
    pub histogram: BTreeMap<usize, f64>,
    pub diameter: usize,
    /// Sum of `d_ij` over ordered pairs.
    pub distance_sum: u64,
    /// Number of ordered pairs at each distance; index 0 is unused.
    pub pair_counts: Vec<u64>,
}

impl PathStats {
    pub fn n_pairs(&self) -> u64 {
        self.pair_counts.iter().sum()
    }

    /// Variance of the distance distribution `P(d)`.
    pub fn variance(&self) -> f64 {
        let pairs = self.n_pairs() as f64;
        if pairs == 0.0 {
            return 0.0;
        }
        let second: f64 = self
            .pair_counts
            .iter()
            .enumerate()
            .map(|(d, &c)| (d * d) as f64 * c as f64)
            .sum::<f64>()
            / pairs;
        second - self.apl * self.apl
    }
}

/// BFS distances from `source`; unreachable nodes get [`UNREACHABLE`].
pub fn shortest_paths_from(g: &Graph, source: NodeId) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; g.n_nodes()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Exact all-pairs path statistics. Errors on a disconnected graph.
pub fn path_stats(g: &Graph) -> Result<PathStats, GraphError> {
    let n = g.n_nodes();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let sources: Vec<NodeId> = (0..n).collect();
    let pair_counts = pair_counts_from(g, &sources)?;
    Ok(stats_from_counts(pair_counts))
}

/// Sum of shortest-path lengths over all ordered pairs, or `None` if the
/// graph is disconnected. This is the quantity the tuner re-evaluates
/// after every move.
pub fn distance_sum(g: &Graph) -> Option<u64> {
    let sources: Vec<NodeId> = (0..g.n_nodes()).collect();
    pair_counts_from(g, &sources).ok().map(|c| weighted_sum(&c))
}

/// Approximate APL from a subset of BFS sources: the mean distance from
/// each listed source to every other node. Exact when `sources` covers all
/// nodes. Errors if some source cannot reach every node.
pub fn sampled_apl(g: &Graph, sources: &[NodeId]) -> Result<f64, GraphError> {
    let n = g.n_nodes();
    if n < 2 || sources.is_empty() {
        return Err(GraphError::Empty);
    }
    let counts = pair_counts_from(g, sources)?;
    Ok(weighted_sum(&counts) as f64 / (sources.len() as f64 * (n - 1) as f64))
}

fn weighted_sum(counts: &[u64]) -> u64 {
    counts.iter().enumerate().map(|(d, &c)| d as u64 * c).sum()
}

fn stats_from_counts(pair_counts: Vec<u64>) -> PathStats {
    let pairs: u64 = pair_counts.iter().sum();
    let distance_sum = weighted_sum(&pair_counts);
    let diameter = pair_counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    let histogram = if pairs == 0 {
        BTreeMap::new()
    } else {
        pair_counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(d, &c)| (d, c as f64 / pairs as f64))
            .collect()
    };
    let apl = if pairs == 0 {
        0.0
    } else {
        distance_sum as f64 / pairs as f64
    };
    PathStats {
        apl,
        histogram,
        diameter,
        distance_sum,
        pair_counts,
    }
}

/// Number of (source, target) pairs at each distance, sources restricted
/// to `sources`, self pairs excluded.
fn pair_counts_from(g: &Graph, sources: &[NodeId]) -> Result<Vec<u64>, GraphError> {
    let n = g.n_nodes();
    let per_block: Vec<(Vec<u64>, u64)> = sources
        .par_chunks(BLOCK)
        .map(|chunk| block_bfs(g, chunk))
        .collect();
    let mut counts = vec![0u64];
    let mut reached = 0u64;
    for (block_counts, block_reached) in per_block {
        if block_counts.len() > counts.len() {
            counts.resize(block_counts.len(), 0);
        }
        for (acc, c) in counts.iter_mut().zip(block_counts) {
            *acc += c;
        }
        reached += block_reached;
    }
    if reached != sources.len() as u64 * (n as u64 - 1) {
        return Err(GraphError::Disconnected);
    }
    Ok(counts)
}

/// Bit-parallel BFS from up to `BLOCK` sources at once. Returns the
/// per-distance pair counts and the number of non-self pairs reached.
fn block_bfs(g: &Graph, sources: &[NodeId]) -> (Vec<u64>, u64) {
    let n = g.n_nodes();
    let mut full: Lanes = [0; WORDS];
    for b in 0..sources.len() {
        full[b / 64] |= 1 << (b % 64);
    }
    let mut visited: Vec<Lanes> = vec![[0; WORDS]; n];
    let mut frontier: Vec<Lanes> = vec![[0; WORDS]; n];
    let mut next: Vec<Lanes> = vec![[0; WORDS]; n];
    for (b, &s) in sources.iter().enumerate() {
        visited[s][b / 64] |= 1 << (b % 64);
        frontier[s][b / 64] |= 1 << (b % 64);
    }
    // nodes whose every source bit is set no longer need visiting
    let mut open: Vec<NodeId> = (0..n).filter(|&v| visited[v] != full).collect();
    let mut counts = vec![0u64];
    let mut reached = 0u64;
    loop {
        let mut level_count = 0u64;
        for &v in &open {
            let mut acc: Lanes = [0; WORDS];
            for &u in g.neighbors(v) {
                let f = &frontier[u];
                for w in 0..WORDS {
                    acc[w] |= f[w];
                }
            }
            let seen = &mut visited[v];
            let out = &mut next[v];
            for w in 0..WORDS {
                let fresh = acc[w] & !seen[w];
                out[w] = fresh;
                seen[w] |= fresh;
                level_count += u64::from(fresh.count_ones());
            }
        }
        if level_count == 0 {
            break;
        }
        counts.push(level_count);
        reached += level_count;
        // frontier for the next level: only nodes in `open` can have fresh bits
        for lanes in frontier.iter_mut() {
            *lanes = [0; WORDS];
        }
        for &v in &open {
            frontier[v] = next[v];
        }
        open.retain(|&v| visited[v] != full);
    }
    (counts, reached)
}

#[cfg(test)]
mod tests {
    use super::super::test_graphs::*;
    use super::*;

    fn brute_force_counts(g: &Graph) -> Option<Vec<u64>> {
        let mut counts = vec![0u64];
        for s in 0..g.n_nodes() {
            for (t, &d) in shortest_paths_from(g, s).iter().enumerate() {
                if t == s {
                    continue;
                }
                if d == UNREACHABLE {
                    return None;
                }
                if d >= counts.len() {
                    counts.resize(d + 1, 0);
                }
                counts[d] += 1;
            }
        }
        Some(counts)
    }

    #[test]
    fn single_source_examples() {
        assert_eq!(shortest_paths_from(&path(3), 0), vec![0, 1, 2]);
        assert_eq!(
            shortest_paths_from(&cycle(8), 0),
            vec![0, 1, 2, 3, 4, 3, 2, 1]
        );
        assert_eq!(shortest_paths_from(&triangle(), 1), vec![1, 0, 1]);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            shortest_paths_from(&split, 0),
            vec![0, 1, UNREACHABLE, UNREACHABLE]
        );
    }

    #[test]
    fn path_of_three() {
        let s = path_stats(&path(3)).unwrap();
        assert_eq!(s.distance_sum, 8);
        assert!((s.apl - 4.0 / 3.0).abs() < 1e-15);
        assert!((s.histogram[&1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.histogram[&2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.diameter, 2);
    }

    #[test]
    fn ring_of_eight_degree_four() {
        let g = Graph::from_edges(8, (0..8).flat_map(|i| [(i, (i + 1) % 8), (i, (i + 2) % 8)]))
            .unwrap();
        let s = path_stats(&g).unwrap();
        // per source: offsets 1..7 give distances 1,1,2,2,2,1,1 -> 10
        assert_eq!(s.distance_sum, 80);
        assert!((s.apl - 10.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn disconnected_is_an_error() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(path_stats(&g), Err(GraphError::Disconnected));
        assert_eq!(distance_sum(&g), None);
    }

    #[test]
    fn larger_than_one_block() {
        // 600 nodes spans three source blocks
        let g = cycle(600);
        let s = path_stats(&g).unwrap();
        assert_eq!(Some(s.pair_counts.clone()), brute_force_counts(&g));
        // closed form for an even cycle: sum over offsets of min(m, n-m)
        let per_source: u64 = (1..600u64).map(|m| m.min(600 - m)).sum();
        assert_eq!(s.distance_sum, 600 * per_source);
    }

    #[test]
    fn sampled_with_all_sources_is_exact() {
        let g = cycle(11);
        let all: Vec<_> = (0..11).collect();
        let exact = path_stats(&g).unwrap().apl;
        assert!((sampled_apl(&g, &all).unwrap() - exact).abs() < 1e-12);
        // vertex-transitive: any single source gives the exact value
        assert!((sampled_apl(&g, &[4]).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn variance_of_path() {
        let s = path_stats(&path(3)).unwrap();
        // d in {1,1,1,1,2,2}: mean 4/3, E[d^2] = 2
        assert!((s.variance() - (2.0 - 16.0 / 9.0)).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn connected_graph() -> impl Strategy<Value = Graph> {
            (3usize..40)
                .prop_flat_map(|n| {
                    (
                        Just(n),
                        proptest::collection::vec((0..n, 0..n), 0..3 * n),
                        proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                    )
                })
                .prop_map(|(n, extra, parents)| {
                    // random spanning tree plus extra chords
                    let mut edges = std::collections::BTreeSet::new();
                    for (v, p) in (1..n).zip(parents) {
                        let u = p.index(v);
                        edges.insert((u.min(v), u.max(v)));
                    }
                    for (u, v) in extra {
                        if u != v {
                            edges.insert((u.min(v), u.max(v)));
                        }
                    }
                    Graph::from_edges(n, edges).unwrap()
                })
        }

        proptest! {
            #[test]
            fn bit_parallel_matches_plain_bfs(g in connected_graph()) {
                let s = path_stats(&g).unwrap();
                prop_assert_eq!(Some(s.pair_counts.clone()), brute_force_counts(&g));
                let total: f64 = s.histogram.values().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                let mean: f64 = s.histogram.iter().map(|(&d, &p)| d as f64 * p).sum();
                prop_assert!((mean - s.apl).abs() < 1e-9);
                prop_assert!(s.apl >= 1.0);
            }

            #[test]
            fn distances_are_symmetric(g in connected_graph()) {
                let all: Vec<Vec<usize>> =
                    (0..g.n_nodes()).map(|s| shortest_paths_from(&g, s)).collect();
                for (i, row) in all.iter().enumerate() {
                    for (j, &d) in row.iter().enumerate() {
                        prop_assert_eq!(d, all[j][i]);
                    }
                }
            }
        }
    }
}
