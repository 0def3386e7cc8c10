//! Ensemble sweeps: steady-state density of the majority rule against the
//! average path length of tuned Watts–Strogatz graphs.
//!
//! A sweep visits every cell `(target, realization, d0)`. Realization `r`
//! is one Watts–Strogatz graph, shared by all targets; it is tuned once per
//! target and the tuned graph is reused for every initial density. All
//! randomness is derived from the master seed:
//!
//! ```text
//! graph    derive_seed(master, [1, r])
//! tuning   derive_seed(master, [2, target_index, r])
//! dynamics derive_seed(master, [3, target_index, r, d0_index])
//! ```
//!
//! so a cell's result does not depend on which other cells run, in what
//! order, or on how many threads.

use std::fmt::{self, Write as _};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{watts_strogatz, GeneratorError, WsConfig};
use crate::graph::{path_stats, Graph, GraphError};
use crate::majority::{simulate, DensityTrace, MajorityConfig, MajorityError};
use crate::seeds::derive_seed;
use crate::tuner::{tune_apl, AnnealConfig, StopReason, TuneError};

const GRAPH_STREAM: u64 = 1;
const TUNE_STREAM: u64 = 2;
const DYNAMICS_STREAM: u64 = 3;
/// Target index used for the dynamics seeds of untuned baseline cells.
pub const UNTUNED_INDEX: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Majority(#[from] MajorityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("could not build a thread pool: {0}")]
    ThreadPool(String),
}

/// Watts–Strogatz parameters without a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseGraph {
    pub n: usize,
    pub k: usize,
    pub p: f64,
}

fn default_off_threshold() -> f64 {
    0.01
}

/// Sweep plan, read from JSON. In `tune` the fields `target_apl` and `seed`
/// are ignored; in `dynamics` the fields `d0` and `seed` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseGraph,
    pub realizations: usize,
    pub target_apls: Vec<f64>,
    #[serde(default)]
    pub tune: AnnealConfig,
    pub dynamics: MajorityConfig,
    pub initial_densities: Vec<f64>,
    /// Number of final steps averaged for the steady state.
    pub steady_window: usize,
    #[serde(default = "default_off_threshold")]
    pub off_threshold: f64,
    #[serde(default)]
    pub master_seed: Option<u64>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let spec: SweepSpec =
            serde_json::from_str(text).map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
        self.ws_config(0).validate()?;
        if self.realizations == 0 {
            return bad("realizations must be positive".into());
        }
        if self.target_apls.is_empty() {
            return bad("target_apls is empty".into());
        }
        if let Some(t) = self
            .target_apls
            .iter()
            .find(|&&t| t.is_nan() || t < 1.0 || t.is_infinite())
        {
            return bad(format!("target APL {t} is below 1"));
        }
        if self.initial_densities.is_empty() {
            return bad("initial_densities is empty".into());
        }
        if let Some(d) = self
            .initial_densities
            .iter()
            .find(|d| !(0.0..=1.0).contains(*d))
        {
            return bad(format!("initial density {d} outside [0, 1]"));
        }
        if self.steady_window == 0 || self.steady_window >= self.dynamics.steps {
            return bad(format!(
                "steady_window must lie in [1, steps), got {} with {} steps",
                self.steady_window, self.dynamics.steps
            ));
        }
        if self.off_threshold.is_nan() || self.off_threshold <= 0.0 {
            return bad("off_threshold must be positive".into());
        }
        self.tune.validate()?;
        self.dynamics.validate()?;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }

    pub fn ws_config(&self, realization: usize) -> WsConfig {
        WsConfig {
            n: self.base.n,
            k: self.base.k,
            p: self.base.p,
            seed: derive_seed(self.seed(), &[GRAPH_STREAM, realization as u64]),
        }
    }

    fn anneal_config(&self, target_index: usize, realization: usize) -> AnnealConfig {
        AnnealConfig {
            target_apl: self.target_apls[target_index],
            seed: derive_seed(
                self.seed(),
                &[TUNE_STREAM, target_index as u64, realization as u64],
            ),
            ..self.tune.clone()
        }
    }

    fn majority_config(
        &self,
        target_index: u64,
        realization: usize,
        d0_index: usize,
    ) -> MajorityConfig {
        MajorityConfig {
            d0: self.initial_densities[d0_index],
            seed: derive_seed(
                self.seed(),
                &[
                    DYNAMICS_STREAM,
                    target_index,
                    realization as u64,
                    d0_index as u64,
                ],
            ),
            ..self.dynamics.clone()
        }
    }

    /// Index of the initial density whose runs probe the active branch.
    fn probe_index(&self) -> usize {
        self.initial_densities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Off,
    Active,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Off => "off",
            Branch::Active => "active",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub target_index: usize,
    pub target_apl: f64,
    pub realized_apl: f64,
    pub realization: usize,
    pub d0_index: usize,
    pub d0: f64,
    pub steady_mean: f64,
    pub steady_std: f64,
    pub branch: Branch,
    /// Whether the tuner got within tolerance of the target.
    pub attained: bool,
}

/// Mean and population standard deviation of the last `w` densities.
pub fn steady_state_of_trace(trace: &DensityTrace, w: usize) -> (f64, f64) {
    steady_state(&trace.densities, w)
}

pub fn steady_state(densities: &[f64], w: usize) -> (f64, f64) {
    let w = w.min(densities.len());
    if w == 0 {
        return (0.0, 0.0);
    }
    let tail = &densities[densities.len() - w..];
    let mean = tail.iter().sum::<f64>() / w as f64;
    let var = tail.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / w as f64;
    (mean, var.sqrt())
}

pub fn classify(steady_mean: f64, off_threshold: f64) -> Branch {
    if steady_mean < off_threshold {
        Branch::Off
    } else {
        Branch::Active
    }
}

/// A realization tuned towards one target.
#[derive(Debug, Clone)]
pub struct TunedGraph {
    pub graph: Graph,
    pub realized_apl: f64,
    pub attained: bool,
    pub stop: StopReason,
}

/// The untuned Watts–Strogatz graph of realization `r`.
pub fn realization_graph(spec: &SweepSpec, realization: usize) -> Result<Graph, HarnessError> {
    Ok(watts_strogatz(&spec.ws_config(realization))?)
}

pub fn tune_realization(
    spec: &SweepSpec,
    target_index: usize,
    realization: usize,
) -> Result<TunedGraph, HarnessError> {
    let graph = realization_graph(spec, realization)?;
    let cfg = spec.anneal_config(target_index, realization);
    let result = tune_apl(graph, &cfg)?;
    let realized_apl = path_stats(&result.graph)?.apl;
    Ok(TunedGraph {
        attained: (realized_apl - cfg.target_apl).abs() <= cfg.tolerance,
        realized_apl,
        stop: result.stop,
        graph: result.graph,
    })
}

/// A graph ready for simulation, with the coordinates its records carry.
struct CellGraph<'a> {
    graph: &'a Graph,
    seed_index: u64,
    target_index: usize,
    target_apl: f64,
    realized_apl: f64,
    attained: bool,
    realization: usize,
}

impl<'a> CellGraph<'a> {
    fn tuned(
        spec: &SweepSpec,
        tuned: &'a TunedGraph,
        target_index: usize,
        realization: usize,
    ) -> Self {
        CellGraph {
            graph: &tuned.graph,
            seed_index: target_index as u64,
            target_index,
            target_apl: spec.target_apls[target_index],
            realized_apl: tuned.realized_apl,
            attained: tuned.attained,
            realization,
        }
    }
}

fn dynamics_record(
    spec: &SweepSpec,
    cell: &CellGraph,
    d0_index: usize,
) -> Result<SweepRecord, HarnessError> {
    let CellGraph {
        graph,
        seed_index,
        target_index,
        target_apl,
        realized_apl,
        attained,
        realization,
    } = *cell;
    let cfg = spec.majority_config(seed_index, realization, d0_index);
    let trace = simulate(graph, &cfg)?;
    let (steady_mean, steady_std) = steady_state_of_trace(&trace, spec.steady_window);
    Ok(SweepRecord {
        target_index,
        target_apl,
        realized_apl,
        realization,
        d0_index,
        d0: cfg.d0,
        steady_mean,
        steady_std,
        branch: classify(steady_mean, spec.off_threshold),
        attained,
    })
}

/// One cell: generate, tune, simulate, classify.
pub fn run_cell(
    spec: &SweepSpec,
    target_index: usize,
    realization: usize,
    d0_index: usize,
) -> Result<SweepRecord, HarnessError> {
    spec.validate()?;
    let tuned = tune_realization(spec, target_index, realization)?;
    dynamics_record(
        spec,
        &CellGraph::tuned(spec, &tuned, target_index, realization),
        d0_index,
    )
}

/// Dynamics on the untuned graph of realization `r`; `target_apl` is set to
/// the graph's own APL and `target_index` to `usize::MAX`.
pub fn run_untuned_cell(
    spec: &SweepSpec,
    realization: usize,
    d0_index: usize,
) -> Result<SweepRecord, HarnessError> {
    spec.validate()?;
    let graph = realization_graph(spec, realization)?;
    let apl = path_stats(&graph)?.apl;
    let cell = CellGraph {
        graph: &graph,
        seed_index: UNTUNED_INDEX,
        target_index: usize::MAX,
        target_apl: apl,
        realized_apl: apl,
        attained: true,
        realization,
    };
    dynamics_record(spec, &cell, d0_index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub target_index: usize,
    pub realization: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl BranchStats {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return BranchStats::default();
        }
        let (mean, std) = steady_state(values, values.len());
        BranchStats {
            count: values.len(),
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSummary {
    pub target_apl: f64,
    /// Realizations whose tuning reached the target.
    pub attained: usize,
    pub mean_realized_apl: Option<f64>,
    pub off: BranchStats,
    pub active: BranchStats,
    /// Share of attained realizations that stay active when started from
    /// the largest initial density.
    pub survival_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    /// One entry per target, in ascending target order.
    pub targets: Vec<TargetSummary>,
    pub critical_apl: Option<f64>,
    /// Targets at which the survival fraction rises above the value at the
    /// next-smaller target.
    pub survival_inversions: Vec<f64>,
    /// Longest run of inversions at adjacent targets.
    pub max_consecutive_inversions: usize,
    pub unattained_records: usize,
    pub failures: Vec<CellFailure>,
}

pub fn summarize(
    spec: &SweepSpec,
    records: &[SweepRecord],
    failures: Vec<CellFailure>,
) -> SweepSummary {
    let probe = spec.probe_index();
    let mut order: Vec<usize> = (0..spec.target_apls.len()).collect();
    order.sort_by(|&a, &b| spec.target_apls[a].total_cmp(&spec.target_apls[b]));

    let targets: Vec<TargetSummary> = order
        .iter()
        .map(|&t| {
            let cell: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.target_index == t && r.attained)
                .collect();
            let mut realized: Vec<(usize, f64)> = cell
                .iter()
                .map(|r| (r.realization, r.realized_apl))
                .collect();
            realized.sort_by_key(|&(r, _)| r);
            realized.dedup_by_key(|&mut (r, _)| r);
            let mean_realized_apl = (!realized.is_empty())
                .then(|| realized.iter().map(|&(_, l)| l).sum::<f64>() / realized.len() as f64);
            let values = |b: Branch| -> Vec<f64> {
                cell.iter()
                    .filter(|r| r.branch == b)
                    .map(|r| r.steady_mean)
                    .collect()
            };
            let probes: Vec<&&SweepRecord> = cell.iter().filter(|r| r.d0_index == probe).collect();
            let survival_fraction = (!probes.is_empty()).then(|| {
                probes.iter().filter(|r| r.branch == Branch::Active).count() as f64
                    / probes.len() as f64
            });
            TargetSummary {
                target_apl: spec.target_apls[t],
                attained: realized.len(),
                mean_realized_apl,
                off: BranchStats::of(&values(Branch::Off)),
                active: BranchStats::of(&values(Branch::Active)),
                survival_fraction,
            }
        })
        .collect();

    let with_survival: Vec<(f64, f64)> = targets
        .iter()
        .filter_map(|t| t.survival_fraction.map(|s| (t.target_apl, s)))
        .collect();
    let mut survival_inversions = Vec::new();
    let mut run = 0;
    let mut max_consecutive_inversions = 0;
    for w in with_survival.windows(2) {
        if w[1].1 > w[0].1 {
            survival_inversions.push(w[1].0);
            run += 1;
            max_consecutive_inversions = max_consecutive_inversions.max(run);
        } else {
            run = 0;
        }
    }

    SweepSummary {
        critical_apl: critical_apl(&with_survival),
        targets,
        survival_inversions,
        max_consecutive_inversions,
        unattained_records: records.iter().filter(|r| !r.attained).count(),
        failures,
    }
}

/// Midpoint between the largest target whose survival fraction is at
/// least 1/2 and the smallest target whose survival fraction is below 1/2.
pub fn critical_apl(survival: &[(f64, f64)]) -> Option<f64> {
    let surviving = survival
        .iter()
        .filter(|&&(_, s)| s >= 0.5)
        .map(|&(l, _)| l)
        .max_by(f64::total_cmp)?;
    let dying = survival
        .iter()
        .filter(|&&(_, s)| s < 0.5)
        .map(|&(l, _)| l)
        .min_by(f64::total_cmp)?;
    Some(0.5 * (surviving + dying))
}

/// Runs every cell. Records come back ordered by target index, then
/// realization, then initial-density index.
pub fn bifurcation_sweep(
    spec: &SweepSpec,
) -> Result<(Vec<SweepRecord>, SweepSummary), HarnessError> {
    spec.validate()?;
    let pairs: Vec<(usize, usize)> = (0..spec.target_apls.len())
        .flat_map(|t| (0..spec.realizations).map(move |r| (t, r)))
        .collect();
    let outcomes: Vec<Result<Vec<SweepRecord>, CellFailure>> = pairs
        .par_iter()
        .map(|&(t, r)| {
            let run = || -> Result<Vec<SweepRecord>, HarnessError> {
                let tuned = tune_realization(spec, t, r)?;
                let cell = CellGraph::tuned(spec, &tuned, t, r);
                (0..spec.initial_densities.len())
                    .map(|d| dynamics_record(spec, &cell, d))
                    .collect()
            };
            run().map_err(|e| CellFailure {
                target_index: t,
                realization: r,
                message: e.to_string(),
            })
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(rs) => records.extend(rs),
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(spec, &records, failures);
    Ok((records, summary))
}

/// [`bifurcation_sweep`] on a dedicated pool of `jobs` threads.
pub fn bifurcation_sweep_with_jobs(
    spec: &SweepSpec,
    jobs: usize,
) -> Result<(Vec<SweepRecord>, SweepSummary), HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    pool.install(|| bifurcation_sweep(spec))
}

pub const RECORDS_HEADER: &str =
    "target_apl,realized_apl,realization,d0,steady_mean,steady_std,branch,attained";

pub fn write_records_csv<W: Write>(records: &[SweepRecord], mut out: W) -> io::Result<()> {
    let mut buf = String::new();
    buf.push_str(RECORDS_HEADER);
    buf.push('\n');
    for r in records {
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{},{}",
            r.target_apl,
            r.realized_apl,
            r.realization,
            r.d0,
            r.steady_mean,
            r.steady_std,
            r.branch,
            r.attained
        );
    }
    out.write_all(buf.as_bytes())
}

pub const SUMMARY_HEADER: &str = "target_apl,attained,mean_realized_apl,survival_fraction,\
active_count,active_mean,active_std,off_count,off_mean,off_std";

pub fn write_summary_csv<W: Write>(summary: &SweepSummary, mut out: W) -> io::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut buf = String::new();
    buf.push_str(SUMMARY_HEADER);
    buf.push('\n');
    for t in &summary.targets {
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{},{},{},{}",
            t.target_apl,
            t.attained,
            opt(t.mean_realized_apl),
            opt(t.survival_fraction),
            t.active.count,
            t.active.mean,
            t.active.std,
            t.off.count,
            t.off.mean,
            t.off.std
        );
    }
    out.write_all(buf.as_bytes())
}

pub fn render_report(spec: &SweepSpec, summary: &SweepSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "sweep: N={} 2k={} p={} realizations={} epsilon={} steps={} scheme={} window={}",
        spec.base.n,
        2 * spec.base.k,
        spec.base.p,
        spec.realizations,
        spec.dynamics.epsilon,
        spec.dynamics.steps,
        spec.dynamics.scheme,
        spec.steady_window
    );
    let _ = writeln!(s, "initial densities: {:?}", spec.initial_densities);
    let _ = writeln!(s, "master seed: {}", spec.seed());
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>10} {:>8} {:>10} {:>9} {:>22} {:>22}",
        "target", "attained", "mean L", "survival", "active n/mean/std", "off n/mean/std"
    );
    for t in &summary.targets {
        let l = t
            .mean_realized_apl
            .map(|x| format!("{x:.4}"))
            .unwrap_or_else(|| "-".into());
        let sv = t
            .survival_fraction
            .map(|x| format!("{x:.3}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>10.4} {:>8} {:>10} {:>9} {:>6} {:>7.4} {:>7.4} {:>6} {:>7.4} {:>7.4}",
            t.target_apl,
            t.attained,
            l,
            sv,
            t.active.count,
            t.active.mean,
            t.active.std,
            t.off.count,
            t.off.mean,
            t.off.std
        );
    }
    let _ = writeln!(s);
    match summary.critical_apl {
        Some(l) => {
            let _ = writeln!(s, "critical APL estimate: {l:.4}");
        }
        None => {
            let _ = writeln!(s, "critical APL estimate: none (no survival crossing)");
        }
    }
    if !summary.survival_inversions.is_empty() {
        let _ = writeln!(
            s,
            "survival inversions at targets {:?} (longest run {})",
            summary.survival_inversions, summary.max_consecutive_inversions
        );
    }
    let _ = writeln!(s, "unattained records: {}", summary.unattained_records);
    for f in &summary.failures {
        let _ = writeln!(
            s,
            "failed cell: target #{} realization {}: {}",
            f.target_index, f.realization, f.message
        );
    }
    s
}
