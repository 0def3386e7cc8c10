//! Simulated-annealing search for a graph with a prescribed average path
//! length, using only moves that keep every degree and every per-node
//! triangle count fixed.
//!
//! Each proposal draws a valid [`RewireMove`], applies it, rejects it if the
//! graph falls apart, then accepts or reverts it by the Metropolis rule on
//! the pseudo-energy `|L - target|`. The temperature is multiplied by
//! `cool_factor` after every `cool_interval` proposals; proposals rejected
//! for disconnecting the graph count towards that interval.

pub mod moves;

use std::fmt;
use std::io::{self, Write};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{paths, sampled_apl, Graph, GraphError};
use crate::seeds::{rng_from_seed, Rng as StreamRng};

pub use moves::{apply_move, propose_move, revert_move, validate_move, RewireMove};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuneError {
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("input graph is not simple: {0}")]
    NotSimple(GraphError),
    #[error("invalid annealing configuration: {0}")]
    InvalidConfig(String),
}

/// How `L` is evaluated after each move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AplMode {
    /// All-pairs BFS.
    #[default]
    Exact,
    /// Approximate: BFS from this many uniformly drawn sources. The same
    /// sources score the configuration before and after a move.
    Sampled(usize),
}

impl fmt::Display for AplMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AplMode::Exact => write!(f, "exact"),
            AplMode::Sampled(s) => write!(f, "sampled:{s}"),
        }
    }
}

impl TryFrom<String> for AplMode {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AplMode> for String {
    fn from(mode: AplMode) -> String {
        mode.to_string()
    }
}

impl std::str::FromStr for AplMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exact" {
            return Ok(AplMode::Exact);
        }
        match s.strip_prefix("sampled:").map(str::parse::<usize>) {
            Some(Ok(n)) if n > 0 => Ok(AplMode::Sampled(n)),
            _ => Err(format!(
                "expected `exact` or `sampled:S` with S > 0, got {s:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub target_apl: f64,
    pub temp0: f64,
    pub cool_factor: f64,
    pub cool_interval: u64,
    pub tolerance: f64,
    pub max_proposals: u64,
    /// Stop after this many consecutive proposals without an acceptance.
    pub plateau_window: u64,
    pub seed: u64,
    pub apl_mode: AplMode,
    /// Candidate `(i, j)` draws per proposal, as a multiple of `N`.
    pub draws_per_node: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            target_apl: 1.0,
            temp0: 10.0,
            cool_factor: 0.9,
            cool_interval: 200,
            tolerance: 0.005,
            max_proposals: 1_000_000,
            plateau_window: 10_000,
            seed: 0,
            apl_mode: AplMode::Exact,
            draws_per_node: 50,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), TuneError> {
        let bad = |msg: &str| Err(TuneError::InvalidConfig(msg.to_string()));
        if self.temp0.is_nan() || self.temp0 <= 0.0 {
            return bad("temp0 must be positive");
        }
        if !(self.cool_factor > 0.0 && self.cool_factor < 1.0) {
            return bad("cool_factor must lie in (0, 1)");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be non-negative");
        }
        if !self.target_apl.is_finite() {
            return bad("target_apl must be finite");
        }
        if self.cool_interval == 0 {
            return bad("cool_interval must be positive");
        }
        if self.draws_per_node == 0 {
            return bad("draws_per_node must be positive");
        }
        Ok(())
    }
}

/// The objective minimized by the tuner.
pub fn pseudo_energy(apl: f64, target: f64) -> f64 {
    (apl - target).abs()
}

/// Always accepts `e_new <= e_old`; otherwise accepts with probability
/// `exp(-(e_new - e_old) / temp)`. Downhill moves draw no randomness.
pub fn metropolis_accept<R: Rng>(e_old: f64, e_new: f64, temp: f64, rng: &mut R) -> bool {
    if e_new <= e_old {
        return true;
    }
    rng.random::<f64>() < (-(e_new - e_old) / temp).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accepted,
    RejectedMetropolis,
    RejectedDisconnect,
    NoCandidate,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::RejectedMetropolis => "rejected-metropolis",
            Outcome::RejectedDisconnect => "rejected-disconnect",
            Outcome::NoCandidate => "no-candidate",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One proposal. `apl_after` and `energy` describe the proposed
/// configuration and are absent when there was nothing to score.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneRecord {
    pub proposal: u64,
    pub apl_before: f64,
    pub apl_after: Option<f64>,
    pub energy: Option<f64>,
    pub temp: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `|L - target| <= tolerance`.
    Converged,
    MaxProposals,
    /// `plateau_window` proposals in a row without an acceptance.
    Plateau,
    NoCandidate,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxProposals => "max-proposals",
            StopReason::Plateau => "plateau",
            StopReason::NoCandidate => "no-candidate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub graph: Graph,
    pub trace: Vec<TuneRecord>,
    pub stop: StopReason,
    /// `L` of the returned graph as tracked by the tuner (an estimate in
    /// sampled mode).
    pub apl: f64,
    pub accepted: u64,
}

/// Step-wise annealer. [`tune_apl`] drives it to completion; callers that
/// need to inspect the graph between proposals can drive it directly.
pub struct Tuner {
    graph: Graph,
    cfg: AnnealConfig,
    rng: StreamRng,
    apl: f64,
    temp: f64,
    proposals: u64,
    since_accept: u64,
    accepted: u64,
    trace: Vec<TuneRecord>,
    stop: Option<StopReason>,
}

impl Tuner {
    pub fn new(graph: Graph, cfg: AnnealConfig) -> Result<Self, TuneError> {
        cfg.validate()?;
        graph.check_invariants().map_err(TuneError::NotSimple)?;
        if !graph.is_connected() {
            return Err(TuneError::Disconnected);
        }
        let mut rng = rng_from_seed(cfg.seed);
        let apl = match cfg.apl_mode {
            AplMode::Exact => exact_apl(&graph).ok_or(TuneError::Disconnected)?,
            AplMode::Sampled(s) => {
                let sources = draw_sources(graph.n_nodes(), s, &mut rng);
                sampled_apl(&graph, &sources).map_err(|_| TuneError::Disconnected)?
            }
        };
        Ok(Tuner {
            temp: cfg.temp0,
            graph,
            cfg,
            rng,
            apl,
            proposals: 0,
            since_accept: 0,
            accepted: 0,
            trace: Vec::new(),
            stop: None,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn apl(&self) -> f64 {
        self.apl
    }

    pub fn temperature(&self) -> f64 {
        self.temp
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn trace(&self) -> &[TuneRecord] {
        &self.trace
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    fn check_stop(&self) -> Option<StopReason> {
        if pseudo_energy(self.apl, self.cfg.target_apl) <= self.cfg.tolerance {
            Some(StopReason::Converged)
        } else if self.proposals >= self.cfg.max_proposals {
            Some(StopReason::MaxProposals)
        } else if self.since_accept >= self.cfg.plateau_window {
            Some(StopReason::Plateau)
        } else {
            None
        }
    }

    /// Runs one proposal and returns its record, or `None` once a stopping
    /// condition holds.
    pub fn step(&mut self) -> Option<&TuneRecord> {
        if self.stop.is_some() {
            return None;
        }
        if let Some(reason) = self.check_stop() {
            self.stop = Some(reason);
            return None;
        }
        let max_draws = self.cfg.draws_per_node.saturating_mul(self.graph.n_nodes());
        let Some(m) = propose_move(&self.graph, &mut self.rng, max_draws) else {
            self.trace.push(TuneRecord {
                proposal: self.proposals,
                apl_before: self.apl,
                apl_after: None,
                energy: None,
                temp: self.temp,
                outcome: Outcome::NoCandidate,
            });
            self.stop = Some(StopReason::NoCandidate);
            return self.trace.last();
        };

        let record = self.evaluate(&m);
        self.proposals += 1;
        if record.outcome == Outcome::Accepted {
            self.accepted += 1;
            self.since_accept = 0;
        } else {
            self.since_accept += 1;
        }
        if self.proposals.is_multiple_of(self.cfg.cool_interval) {
            self.temp *= self.cfg.cool_factor;
        }
        self.trace.push(record);
        self.trace.last()
    }

    fn evaluate(&mut self, m: &RewireMove) -> TuneRecord {
        let target = self.cfg.target_apl;
        let temp = self.temp;
        let mut record = TuneRecord {
            proposal: self.proposals,
            apl_before: self.apl,
            apl_after: None,
            energy: None,
            temp,
            outcome: Outcome::RejectedDisconnect,
        };
        apply_move(&mut self.graph, m).expect("proposed moves are valid");
        if !self.graph.is_connected() {
            revert_move(&mut self.graph, m).expect("move was just applied");
            return record;
        }
        let (old, new) = match self.cfg.apl_mode {
            AplMode::Exact => {
                let new = exact_apl(&self.graph).expect("connectivity checked");
                (self.apl, new)
            }
            AplMode::Sampled(s) => {
                let sources = draw_sources(self.graph.n_nodes(), s, &mut self.rng);
                let new = sampled_apl(&self.graph, &sources).expect("connectivity checked");
                revert_move(&mut self.graph, m).expect("move was just applied");
                let old = sampled_apl(&self.graph, &sources).expect("previous graph connected");
                apply_move(&mut self.graph, m).expect("move was valid a moment ago");
                (old, new)
            }
        };
        record.apl_before = old;
        let e_old = pseudo_energy(old, target);
        let e_new = pseudo_energy(new, target);
        record.apl_after = Some(new);
        record.energy = Some(e_new);
        if metropolis_accept(e_old, e_new, temp, &mut self.rng) {
            self.apl = new;
            record.outcome = Outcome::Accepted;
        } else {
            revert_move(&mut self.graph, m).expect("move was just applied");
            record.outcome = Outcome::RejectedMetropolis;
        }
        record
    }

    pub fn run(mut self) -> TuneResult {
        while self.step().is_some() {}
        self.finish()
    }

    /// Stops the run where it stands.
    pub fn finish(self) -> TuneResult {
        TuneResult {
            stop: self
                .stop
                .or_else(|| self.check_stop())
                .unwrap_or(StopReason::MaxProposals),
            graph: self.graph,
            trace: self.trace,
            apl: self.apl,
            accepted: self.accepted,
        }
    }
}

/// Anneals `g` towards `cfg.target_apl`.
pub fn tune_apl(g: Graph, cfg: &AnnealConfig) -> Result<TuneResult, TuneError> {
    Ok(Tuner::new(g, cfg.clone())?.run())
}

fn exact_apl(g: &Graph) -> Option<f64> {
    let n = g.n_nodes() as f64;
    paths::distance_sum(g).map(|sum| sum as f64 / (n * (n - 1.0)))
}

fn draw_sources<R: Rng>(n: usize, s: usize, rng: &mut R) -> Vec<usize> {
    let mut v = sample(rng, n, s.min(n)).into_vec();
    v.sort_unstable();
    v
}

pub const TRACE_HEADER: &str = "proposal,L_before,L_after,energy,temp,outcome";

/// Writes the trace as CSV; absent values are empty fields.
pub fn write_trace_csv<W: Write>(records: &[TuneRecord], mut out: W) -> io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut buf = String::new();
    buf.push_str(TRACE_HEADER);
    buf.push('\n');
    for r in records {
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.proposal,
            r.apl_before,
            opt(r.apl_after),
            opt(r.energy),
            r.temp,
            r.outcome
        ));
    }
    out.write_all(buf.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{ring_lattice, watts_strogatz, WsConfig};
    use crate::graph::{clustering_stats, path_stats};

    #[test]
    fn energy_examples() {
        assert!((pseudo_energy(6.5, 6.7) - 0.2).abs() < 1e-12);
        assert_eq!(pseudo_energy(6.7, 6.7), 0.0);
        assert_eq!(pseudo_energy(10.0, 6.0), 4.0);
    }

    #[test]
    fn downhill_always_accepted() {
        let mut rng = rng_from_seed(0);
        for temp in [1e-12, 1.0, 1e6] {
            assert!((0..1000).all(|_| metropolis_accept(1.0, 0.5, temp, &mut rng)));
            assert!(metropolis_accept(1.0, 1.0, temp, &mut rng));
        }
    }

    #[test]
    fn frozen_limit_rejects_uphill() {
        let mut rng = rng_from_seed(1);
        assert!((0..10_000).all(|_| !metropolis_accept(1.0, 2.0, 1e-12, &mut rng)));
    }

    #[test]
    fn acceptance_grows_with_temperature() {
        let freq = |temp: f64| {
            let mut rng = rng_from_seed(2);
            (0..20_000)
                .filter(|_| metropolis_accept(0.0, 0.5, temp, &mut rng))
                .count()
        };
        let temps = [0.05, 0.2, 0.5, 1.0, 5.0];
        let counts: Vec<_> = temps.iter().map(|&t| freq(t)).collect();
        // common random numbers make the counts exactly monotone
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }

    #[test]
    fn apl_mode_parsing() {
        assert_eq!("exact".parse::<AplMode>(), Ok(AplMode::Exact));
        assert_eq!("sampled:64".parse::<AplMode>(), Ok(AplMode::Sampled(64)));
        assert!("sampled:0".parse::<AplMode>().is_err());
        assert!("sampled".parse::<AplMode>().is_err());
        assert_eq!(AplMode::Sampled(8).to_string(), "sampled:8");
    }

    #[test]
    fn config_validation() {
        let ok = AnnealConfig::default();
        ok.validate().unwrap();
        for bad in [
            AnnealConfig {
                temp0: 0.0,
                ..ok.clone()
            },
            AnnealConfig {
                cool_factor: 1.0,
                ..ok.clone()
            },
            AnnealConfig {
                tolerance: -1.0,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn lattice_stops_without_candidates() {
        let g = ring_lattice(100, 3).unwrap();
        let cfg = AnnealConfig {
            target_apl: 10.0,
            ..Default::default()
        };
        let result = tune_apl(g.clone(), &cfg).unwrap();
        assert_eq!(result.stop, StopReason::NoCandidate);
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.trace[0].outcome, Outcome::NoCandidate);
        assert_eq!(result.graph, g);
    }

    #[test]
    fn rejects_disconnected_input() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(matches!(
            tune_apl(g, &AnnealConfig::default()),
            Err(TuneError::Disconnected)
        ));
    }

    #[test]
    fn already_at_target() {
        let g = watts_strogatz(&WsConfig {
            n: 200,
            k: 3,
            p: 0.2,
            seed: 1,
        })
        .unwrap();
        let l0 = path_stats(&g).unwrap().apl;
        let cfg = AnnealConfig {
            target_apl: l0,
            tolerance: 0.0,
            ..Default::default()
        };
        let result = tune_apl(g, &cfg).unwrap();
        assert_eq!(result.stop, StopReason::Converged);
        assert!(result.trace.is_empty());
    }

    fn small_run(mode: AplMode, seed: u64) -> (Graph, TuneResult) {
        let g = watts_strogatz(&WsConfig {
            n: 300,
            k: 3,
            p: 0.1,
            seed: 4,
        })
        .unwrap();
        let l0 = path_stats(&g).unwrap().apl;
        let cfg = AnnealConfig {
            target_apl: 1.15 * l0,
            tolerance: 0.01,
            max_proposals: 20_000,
            seed,
            apl_mode: mode,
            ..Default::default()
        };
        (g.clone(), tune_apl(g, &cfg).unwrap())
    }

    #[test]
    fn raises_apl_and_preserves_structure() {
        let (g0, result) = small_run(AplMode::Exact, 7);
        assert_eq!(result.stop, StopReason::Converged);
        let final_stats = path_stats(&result.graph).unwrap();
        assert!((final_stats.apl - result.apl).abs() < 1e-12);
        assert_eq!(result.graph.degrees(), g0.degrees());
        assert_eq!(
            clustering_stats(&result.graph).per_node_triangles,
            clustering_stats(&g0).per_node_triangles
        );
    }

    #[test]
    fn trace_chains_and_cools() {
        let (g0, result) = small_run(AplMode::Exact, 8);
        let mut current = path_stats(&g0).unwrap().apl;
        for (idx, r) in result.trace.iter().enumerate() {
            assert_eq!(r.proposal, idx as u64);
            assert_eq!(r.apl_before, current);
            let expected_temp = 10.0 * 0.9f64.powi((r.proposal / 200) as i32);
            assert!((r.temp - expected_temp).abs() <= 1e-9 * expected_temp);
            if r.outcome == Outcome::Accepted {
                current = r.apl_after.unwrap();
            }
        }
        assert_eq!(current, result.apl);
    }

    #[test]
    fn deterministic_given_seed() {
        let (_, a) = small_run(AplMode::Exact, 5);
        let (_, b) = small_run(AplMode::Exact, 5);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn sampled_mode_runs() {
        let (g0, result) = small_run(AplMode::Sampled(32), 3);
        assert!(result.accepted > 0);
        assert_eq!(result.graph.degrees(), g0.degrees());
        let exact = path_stats(&result.graph).unwrap().apl;
        assert!(exact > path_stats(&g0).unwrap().apl);
    }

    #[test]
    fn zero_temperature_is_greedy() {
        let g = watts_strogatz(&WsConfig {
            n: 200,
            k: 2,
            p: 0.2,
            seed: 6,
        })
        .unwrap();
        let l0 = path_stats(&g).unwrap().apl;
        let cfg = AnnealConfig {
            target_apl: 2.0 * l0,
            temp0: 1e-12,
            max_proposals: 2_000,
            ..Default::default()
        };
        let target = cfg.target_apl;
        let result = tune_apl(g, &cfg).unwrap();
        for r in result
            .trace
            .iter()
            .filter(|r| r.outcome == Outcome::Accepted)
        {
            let e_old = pseudo_energy(r.apl_before, target);
            assert!(r.energy.unwrap() <= e_old);
        }
    }

    #[test]
    fn trace_csv_format() {
        let records = vec![
            TuneRecord {
                proposal: 0,
                apl_before: 2.5,
                apl_after: Some(2.75),
                energy: Some(0.25),
                temp: 10.0,
                outcome: Outcome::Accepted,
            },
            TuneRecord {
                proposal: 1,
                apl_before: 2.75,
                apl_after: None,
                energy: None,
                temp: 10.0,
                outcome: Outcome::RejectedDisconnect,
            },
        ];
        let mut out = Vec::new();
        write_trace_csv(&records, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "proposal,L_before,L_after,energy,temp,outcome\n\
             0,2.5,2.75,0.25,10,accepted\n\
             1,2.75,,,10,rejected-disconnect\n"
        );
    }
}
