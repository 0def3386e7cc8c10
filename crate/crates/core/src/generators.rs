//! Ring lattices and Watts–Strogatz small-world graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::seeds::{derive_seed, rng_from_seed};

/// Attempts made by [`watts_strogatz`] before giving up on connectivity.
pub const DEFAULT_MAX_ATTEMPTS: u32 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("ring lattice needs n > 4k >= 4, got n = {n}, k = {k}")]
    InvalidLattice { n: usize, k: usize },
    #[error("rewiring probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("no connected graph after {0} attempts")]
    RetriesExhausted(u32),
}

/// Watts–Strogatz parameters. Every node starts with `k` neighbors on each
/// side (degree `2k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WsConfig {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
}

impl WsConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        check_lattice(self.n, self.k)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(GeneratorError::InvalidProbability(self.p));
        }
        Ok(())
    }
}

fn check_lattice(n: usize, k: usize) -> Result<(), GeneratorError> {
    if k < 1 || n <= 4 * k {
        return Err(GeneratorError::InvalidLattice { n, k });
    }
    Ok(())
}

/// Circulant graph: `i` adjacent to `i ± m (mod n)` for `m = 1..=k`.
pub fn ring_lattice(n: usize, k: usize) -> Result<Graph, GeneratorError> {
    check_lattice(n, k)?;
    let edges = (0..n).flat_map(|i| (1..=k).map(move |m| (i, (i + m) % n)));
    Ok(Graph::from_edges(n, edges).expect("ring lattice with n > 4k is simple"))
}

/// Watts–Strogatz graph, retried until connected.
///
/// Lattice edges `(i, i+m)` are visited for ascending `i`, then `m = 1..=k`.
/// With probability `p` the endpoint `i+m` is replaced by a uniformly
/// drawn node, redrawing on self-loops and existing edges. Attempt `t`
/// (from 0) draws from the seed `derive_seed(cfg.seed, [t])`.
pub fn watts_strogatz(cfg: &WsConfig) -> Result<Graph, GeneratorError> {
    watts_strogatz_with_attempts(cfg, DEFAULT_MAX_ATTEMPTS)
}

pub fn watts_strogatz_with_attempts(
    cfg: &WsConfig,
    max_attempts: u32,
) -> Result<Graph, GeneratorError> {
    cfg.validate()?;
    for attempt in 0..max_attempts {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &[u64::from(attempt)]));
        let g = rewire_lattice(cfg, &mut rng);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GeneratorError::RetriesExhausted(max_attempts))
}

fn rewire_lattice<R: Rng>(cfg: &WsConfig, rng: &mut R) -> Graph {
    let n = cfg.n;
    let mut g = ring_lattice(n, cfg.k).expect("validated");
    if cfg.p == 0.0 {
        return g;
    }
    for i in 0..n {
        for m in 1..=cfg.k {
            if rng.random::<f64>() >= cfg.p || g.degree(i) >= n - 1 {
                continue;
            }
            let old = (i + m) % n;
            let target = loop {
                let w = rng.random_range(0..n);
                if w != i && !g.has_edge(i, w) {
                    break w;
                }
            };
            g.remove_edge(i, old).expect("lattice edge still present");
            g.add_edge(i, target).expect("target checked absent");
        }
    }
    g
}
