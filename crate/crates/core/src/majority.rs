//! Noisy majority rule on a graph.
//!
//! Node `i` counts `sigma_i`, the active members of its neighborhood
//! including itself (`k_i + 1` members). With threshold `(k_i + 1) / 2`:
//!
//! | state    | `sigma_i > (k_i+1)/2` | otherwise                                   |
//! |----------|-----------------------|---------------------------------------------|
//! | inactive | activates w.p. `1-ε`  | activates w.p. `ε` if a neighbor is active, else stays |
//! | active   | deactivates w.p. `ε`  | deactivates w.p. `1-ε`                      |
//!
//! The synchronous scheme draws node `i`'s uniform at step `t` from the
//! counter-based stream `counter_uniform(key, t, i)`, so a step gives the
//! same result whether nodes are processed serially or in parallel.

use std::fmt;
use std::io::{self, Write};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::seeds::{counter_uniform, derive_seed, rng_from_seed, Rng as StreamRng};

const INIT_STREAM: u64 = 0;
const SYNC_STREAM: u64 = 1;
const ASYNC_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorityError {
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    Epsilon(f64),
    #[error("initial density must lie in [0, 1], got {0}")]
    InitialDensity(f64),
    #[error("state vector has {states} entries but the graph has {nodes} nodes")]
    SizeMismatch { states: usize, nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpdateScheme {
    #[default]
    #[serde(rename = "sync")]
    Synchronous,
    #[serde(rename = "async")]
    Asynchronous,
}

impl fmt::Display for UpdateScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateScheme::Synchronous => "sync",
            UpdateScheme::Asynchronous => "async",
        })
    }
}

impl std::str::FromStr for UpdateScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(UpdateScheme::Synchronous),
            "async" => Ok(UpdateScheme::Asynchronous),
            _ => Err(format!("expected `sync` or `async`, got {s:?}")),
        }
    }
}

/// Binary node states with a cached active count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVector {
    states: Vec<bool>,
    active: usize,
}

impl StateVector {
    pub fn new(states: Vec<bool>) -> Self {
        let active = states.iter().filter(|&&a| a).count();
        StateVector { states, active }
    }

    pub fn all_inactive(n: usize) -> Self {
        StateVector::new(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[bool] {
        &self.states
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.states[i]
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn density(&self) -> f64 {
        if self.states.is_empty() {
            0.0
        } else {
            self.active as f64 / self.states.len() as f64
        }
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if self.states[i] != value {
            self.states[i] = value;
            if value {
                self.active += 1;
            } else {
                self.active -= 1;
            }
        }
    }

    /// One character per node, `1` for active.
    pub fn to_bit_string(&self) -> String {
        self.states
            .iter()
            .map(|&a| if a { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MajorityConfig {
    pub epsilon: f64,
    pub steps: usize,
    pub scheme: UpdateScheme,
    pub d0: f64,
    pub seed: u64,
    /// Keep a full state snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
}

impl Default for MajorityConfig {
    fn default() -> Self {
        MajorityConfig {
            epsilon: 0.1,
            steps: 1000,
            scheme: UpdateScheme::Synchronous,
            d0: 0.5,
            seed: 0,
            snapshot_every: 0,
        }
    }
}

impl MajorityConfig {
    pub fn validate(&self) -> Result<(), MajorityError> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(MajorityError::Epsilon(self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.d0) {
            return Err(MajorityError::InitialDensity(self.d0));
        }
        Ok(())
    }
}

/// Density after every step, starting with `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTrace {
    pub densities: Vec<f64>,
    pub scheme: UpdateScheme,
    /// `(t, states)` pairs, when snapshots were requested.
    pub snapshots: Vec<(usize, StateVector)>,
}

impl DensityTrace {
    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn final_density(&self) -> f64 {
        self.densities.last().copied().unwrap_or(0.0)
    }
}

/// Exactly `round(d0 * n)` active nodes, placed uniformly at random.
pub fn init_states<R: Rng>(n: usize, d0: f64, rng: &mut R) -> StateVector {
    let count = ((d0 * n as f64).round() as usize).min(n);
    let mut states = vec![false; n];
    for i in sample(rng, n, count) {
        states[i] = true;
    }
    StateVector::new(states)
}

/// `sigma_i`: active nodes among `i` and its neighbors.
pub fn sigma(g: &Graph, s: &StateVector, i: usize) -> usize {
    usize::from(s.is_active(i)) + g.neighbors(i).iter().filter(|&&j| s.is_active(j)).count()
}

/// Whether `sigma` is a strict majority of a neighborhood of `degree + 1`.
pub fn is_majority(sigma: usize, degree: usize) -> bool {
    2 * sigma > degree + 1
}

/// Probability that a node changes state in one update.
///
/// For an inactive node `sigma` counts only its neighbors, so `sigma > 0`
/// is exactly "at least one neighbor is active".
pub fn flip_probability(active: bool, sigma: usize, degree: usize, epsilon: f64) -> f64 {
    let majority = is_majority(sigma, degree);
    match (active, majority) {
        (false, true) => 1.0 - epsilon,
        (false, false) if sigma > 0 => epsilon,
        (false, false) => 0.0,
        (true, true) => epsilon,
        (true, false) => 1.0 - epsilon,
    }
}

/// Advances a state vector on a fixed graph.
pub struct Dynamics<'g> {
    graph: &'g Graph,
    states: StateVector,
    epsilon: f64,
    scheme: UpdateScheme,
    sync_key: u64,
    async_rng: StreamRng,
    t: usize,
}

impl<'g> Dynamics<'g> {
    pub fn new(
        graph: &'g Graph,
        initial: StateVector,
        cfg: &MajorityConfig,
    ) -> Result<Self, MajorityError> {
        cfg.validate()?;
        if initial.len() != graph.n_nodes() {
            return Err(MajorityError::SizeMismatch {
                states: initial.len(),
                nodes: graph.n_nodes(),
            });
        }
        Ok(Dynamics {
            graph,
            states: initial,
            epsilon: cfg.epsilon,
            scheme: cfg.scheme,
            sync_key: derive_seed(cfg.seed, &[SYNC_STREAM]),
            async_rng: rng_from_seed(derive_seed(cfg.seed, &[ASYNC_STREAM])),
            t: 0,
        })
    }

    pub fn states(&self) -> &StateVector {
        &self.states
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn step(&mut self) {
        match self.scheme {
            UpdateScheme::Synchronous => self.step_sync(),
            UpdateScheme::Asynchronous => self.step_async(),
        }
        self.t += 1;
    }

    fn step_sync(&mut self) {
        let g = self.graph;
        let old = &self.states;
        let (eps, key, t) = (self.epsilon, self.sync_key, self.t as u64);
        let next: Vec<bool> = (0..g.n_nodes())
            .into_par_iter()
            .map(|i| {
                let active = old.is_active(i);
                let p = flip_probability(active, sigma(g, old, i), g.degree(i), eps);
                let flip = p > 0.0 && counter_uniform(key, t, i as u64) < p;
                active ^ flip
            })
            .collect();
        self.states = StateVector::new(next);
    }

    fn step_async(&mut self) {
        let g = self.graph;
        let n = g.n_nodes();
        for _ in 0..n {
            let i = self.async_rng.random_range(0..n);
            let active = self.states.is_active(i);
            let p = flip_probability(active, sigma(g, &self.states, i), g.degree(i), self.epsilon);
            if p > 0.0 && self.async_rng.random::<f64>() < p {
                self.states.set(i, !active);
            }
        }
    }
}

/// Runs `cfg.steps` steps from `init_states(n, cfg.d0)`.
pub fn simulate(g: &Graph, cfg: &MajorityConfig) -> Result<DensityTrace, MajorityError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[INIT_STREAM]));
    let initial = init_states(g.n_nodes(), cfg.d0, &mut rng);
    simulate_from(g, initial, cfg)
}

/// Runs `cfg.steps` steps from an explicit initial state; `cfg.d0` is
/// ignored.
pub fn simulate_from(
    g: &Graph,
    initial: StateVector,
    cfg: &MajorityConfig,
) -> Result<DensityTrace, MajorityError> {
    let mut dynamics = Dynamics::new(g, initial, cfg)?;
    let mut densities = Vec::with_capacity(cfg.steps + 1);
    let mut snapshots = Vec::new();
    let mut record = |d: &Dynamics| {
        densities.push(d.states().density());
        if cfg.snapshot_every > 0 && d.time().is_multiple_of(cfg.snapshot_every) {
            snapshots.push((d.time(), d.states().clone()));
        }
    };
    record(&dynamics);
    for _ in 0..cfg.steps {
        dynamics.step();
        record(&dynamics);
    }
    Ok(DensityTrace {
        densities,
        scheme: cfg.scheme,
        snapshots,
    })
}

pub const DENSITY_HEADER: &str = "t,d";

pub fn write_density_csv<W: Write>(trace: &DensityTrace, mut out: W) -> io::Result<()> {
    let mut buf = String::with_capacity(16 * trace.len() + 4);
    buf.push_str(DENSITY_HEADER);
    buf.push('\n');
    for (t, d) in trace.densities.iter().enumerate() {
        buf.push_str(&format!("{t},{d}\n"));
    }
    out.write_all(buf.as_bytes())
}

/// One line of `0`/`1` characters per snapshot.
pub fn write_snapshots<W: Write>(trace: &DensityTrace, mut out: W) -> io::Result<()> {
    for (_, s) in &trace.snapshots {
        out.write_all(s.to_bit_string().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
