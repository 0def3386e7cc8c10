use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;

use apltune::generators::{ring_lattice, watts_strogatz, GeneratorError, WsConfig};
use apltune::graph::edgelist::{parse_edge_list, to_edge_list_string, EdgeListError};
use apltune::graph::{clustering_stats, path_stats, Graph, GraphError};
use apltune::harness::{
    bifurcation_sweep, bifurcation_sweep_with_jobs, render_report, write_records_csv,
    write_summary_csv, HarnessError, SweepSpec,
};
use apltune::majority::{simulate, write_density_csv, write_snapshots, MajorityConfig};
use apltune::tuner::{tune_apl, write_trace_csv, AnnealConfig, TuneError};

use crate::manifest::{file_digest, manifest_dir, sha256_hex, Manifest};
use crate::{
    Cli, CliError, CliResult, Command, GenerateArgs, MeasureArgs, Model, ReplayArgs, SimulateArgs,
    SweepArgs, TuneArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn dispatch(cli: Cli, argv: Vec<OsString>) -> CliResult<()> {
    if let Command::Replay(args) = &cli.command {
        return replay(args);
    }
    let explicit = cli.seed;
    let run = Run::new(&cli.command, argv, explicit);
    match cli.command {
        Command::Generate(a) => generate(run, a),
        Command::Measure(a) => measure(run, a),
        Command::Tune(a) => tune(run, a),
        Command::Simulate(a) => simulate_cmd(run, a),
        Command::Sweep(a) => sweep(run, a),
        Command::Replay(_) => unreachable!(),
    }
}

/// Collects what one invocation read and wrote.
struct Run {
    command: &'static str,
    argv: Vec<String>,
    explicit_seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    first_output: Option<PathBuf>,
}

impl Run {
    fn new(command: &Command, argv: Vec<OsString>, explicit_seed: Option<u64>) -> Self {
        let name = match command {
            Command::Generate(_) => "generate",
            Command::Measure(_) => "measure",
            Command::Tune(_) => "tune",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        };
        Run {
            command: name,
            argv: argv
                .iter()
                .map(|a| a.to_string_lossy().into_owned())
                .collect(),
            explicit_seed,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            first_output: None,
        }
    }

    /// The explicit seed, else `fallback`, else a random one (printed).
    fn seed_or(&self, fallback: Option<u64>) -> u64 {
        if let Some(s) = self.explicit_seed.or(fallback) {
            return s;
        }
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    }

    fn read_input(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn read_graph(&mut self, path: &Path) -> CliResult<Graph> {
        let text = self.read_input(path)?;
        parse_edge_list(&text).map_err(|e| match e {
            EdgeListError::Io(e) => CliError::Runtime(e.to_string()),
            e => CliError::Usage(format!("{}: {e}", path.display())),
        })
    }

    fn write_output(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        fs::write(path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.outputs
            .insert(path.display().to_string(), sha256_hex(bytes));
        if self.first_output.is_none() {
            self.first_output = Some(path.to_path_buf());
        }
        Ok(())
    }

    /// Writes the manifest next to the first output, if there was one.
    fn finish(self, seed: u64, params: serde_json::Value) -> CliResult<()> {
        let Some(primary) = self.first_output.clone() else {
            return Ok(());
        };
        let mut args = self.argv;
        if self.explicit_seed != Some(seed) {
            args.push("--seed".into());
            args.push(seed.to_string());
        }
        let cwd = std::env::current_dir()
            .map_err(|e| CliError::Runtime(format!("cannot resolve working directory: {e}")))?;
        let manifest = Manifest {
            command: self.command.into(),
            version: VERSION.into(),
            seed,
            params,
            args,
            cwd,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        manifest.write_to(&manifest_dir(&primary))?;
        Ok(())
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn generator_err(e: GeneratorError) -> CliError {
    match e {
        GeneratorError::RetriesExhausted(_) => CliError::Runtime(e.to_string()),
        e => CliError::Usage(e.to_string()),
    }
}

fn tune_err(e: TuneError) -> CliError {
    match e {
        TuneError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        e => CliError::Runtime(e.to_string()),
    }
}

fn graph_err(e: GraphError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn generate(mut run: Run, a: GenerateArgs) -> CliResult<()> {
    let seed = run.seed_or(None);
    let (graph, params) = match a.model {
        Model::Ring => {
            if a.p.is_some() {
                return Err(CliError::Usage("--p only applies to --model ws".into()));
            }
            let g = ring_lattice(a.n, a.k).map_err(generator_err)?;
            (g, json!({ "model": "ring", "n": a.n, "k": a.k }))
        }
        Model::Ws => {
            let p =
                a.p.ok_or_else(|| CliError::Usage("--model ws requires --p".into()))?;
            let cfg = WsConfig {
                n: a.n,
                k: a.k,
                p,
                seed,
            };
            let g = watts_strogatz(&cfg).map_err(generator_err)?;
            (g, json!({ "model": "ws", "n": a.n, "k": a.k, "p": p }))
        }
    };
    run.write_output(&a.out, to_edge_list_string(&graph).as_bytes())?;
    let params = json!({ "graph": params, "out": a.out });
    run.finish(seed, params)
}

/// `(N, M, L, C, min_deg, max_deg)` line and the `P(d)` CSV.
pub fn measurement(g: &Graph) -> CliResult<(String, String)> {
    let paths = path_stats(g).map_err(graph_err)?;
    let c = clustering_stats(g).global;
    let degrees = g.degrees();
    let min = degrees.iter().min().copied().unwrap_or(0);
    let max = degrees.iter().max().copied().unwrap_or(0);
    let line = format!(
        "{} {} {} {} {} {}",
        g.n_nodes(),
        g.n_edges(),
        paths.apl,
        c,
        min,
        max
    );
    let mut csv = String::from("d,P\n");
    for (d, p) in &paths.histogram {
        let _ = writeln!(csv, "{d},{p}");
    }
    Ok((line, csv))
}

fn measure(mut run: Run, a: MeasureArgs) -> CliResult<()> {
    let seed = run.seed_or(Some(0));
    let g = run.read_graph(&a.input)?;
    let (line, csv) = measurement(&g)?;
    println!("{line}");
    if let Some(dist) = &a.dist {
        run.write_output(dist, csv.as_bytes())?;
    }
    let params = json!({ "in": a.input, "dist": a.dist });
    run.finish(seed, params)
}

fn tune(mut run: Run, a: TuneArgs) -> CliResult<()> {
    let seed = run.seed_or(None);
    let cfg = AnnealConfig {
        target_apl: a.target_apl,
        temp0: a.temp0,
        cool_factor: a.cool_factor,
        cool_interval: a.cool_interval,
        tolerance: a.tol,
        max_proposals: a.max_proposals,
        plateau_window: a.plateau_window,
        seed,
        apl_mode: a.apl_mode,
        ..AnnealConfig::default()
    };
    cfg.validate().map_err(tune_err)?;
    let g = run.read_graph(&a.input)?;
    let result = tune_apl(g, &cfg).map_err(tune_err)?;
    eprintln!(
        "stop: {}  L: {}  accepted: {}  proposals: {}",
        result.stop.as_str(),
        result.apl,
        result.accepted,
        result.trace.len()
    );
    run.write_output(&a.out, to_edge_list_string(&result.graph).as_bytes())?;
    if let Some(trace) = &a.trace {
        let mut buf = Vec::new();
        write_trace_csv(&result.trace, &mut buf).map_err(io_err)?;
        run.write_output(trace, &buf)?;
    }
    let params = json!({
        "in": a.input,
        "out": a.out,
        "trace": a.trace,
        "anneal": cfg,
    });
    run.finish(seed, params)
}

fn simulate_cmd(mut run: Run, a: SimulateArgs) -> CliResult<()> {
    let seed = run.seed_or(None);
    let cfg = MajorityConfig {
        epsilon: a.epsilon,
        steps: a.steps,
        scheme: a.scheme,
        d0: a.d0,
        seed,
        snapshot_every: a.snapshot_every.unwrap_or(0),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let g = run.read_graph(&a.input)?;
    let trace = simulate(&g, &cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut buf = Vec::new();
    write_density_csv(&trace, &mut buf).map_err(io_err)?;
    run.write_output(&a.out, &buf)?;
    if let Some(path) = &a.snapshots {
        let mut buf = Vec::new();
        write_snapshots(&trace, &mut buf).map_err(io_err)?;
        run.write_output(path, &buf)?;
    }
    eprintln!("final density: {}", trace.final_density());
    let params = json!({
        "in": a.input,
        "out": a.out,
        "snapshots": a.snapshots,
        "dynamics": cfg,
    });
    run.finish(seed, params)
}

fn harness_err(e: HarnessError) -> CliError {
    match e {
        HarnessError::InvalidSpec(_) => CliError::Usage(e.to_string()),
        HarnessError::Generator(g) => generator_err(g),
        HarnessError::Tune(t) => tune_err(t),
        e => CliError::Runtime(e.to_string()),
    }
}

fn sweep(mut run: Run, a: SweepArgs) -> CliResult<()> {
    let text = run.read_input(&a.config)?;
    let mut spec = SweepSpec::from_json(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let seed = run.seed_or(spec.master_seed);
    spec.master_seed = Some(seed);
    if a.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    let (records, summary) = match a.jobs {
        Some(j) => bifurcation_sweep_with_jobs(&spec, j),
        None => bifurcation_sweep(&spec),
    }
    .map_err(harness_err)?;

    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let mut buf = Vec::new();
    write_records_csv(&records, &mut buf).map_err(io_err)?;
    run.write_output(&a.out_dir.join("records.csv"), &buf)?;
    let mut buf = Vec::new();
    write_summary_csv(&summary, &mut buf).map_err(io_err)?;
    run.write_output(&a.out_dir.join("summary.csv"), &buf)?;
    let report = render_report(&spec, &summary);
    run.write_output(&a.out_dir.join("report.txt"), report.as_bytes())?;
    print!("{report}");

    let params = serde_json::to_value(&spec).map_err(|e| CliError::Runtime(e.to_string()))?;
    run.finish(seed, json!({ "spec": params, "out_dir": a.out_dir }))
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let manifest = Manifest::read(&a.manifest)?;
    if manifest.command == "replay" {
        return Err(CliError::Usage(
            "a replay manifest cannot be replayed".into(),
        ));
    }
    if manifest.version != VERSION {
        eprintln!(
            "warning: manifest written by version {}, running {VERSION}",
            manifest.version
        );
    }
    let previous = std::env::current_dir().map_err(io_err)?;
    if manifest.cwd.is_dir() {
        std::env::set_current_dir(&manifest.cwd).map_err(io_err)?;
    }
    let result = replay_in_place(&manifest);
    std::env::set_current_dir(previous).map_err(io_err)?;
    result
}

fn replay_in_place(manifest: &Manifest) -> CliResult<()> {
    for (path, digest) in &manifest.inputs {
        if file_digest(Path::new(path))? != *digest {
            return Err(CliError::Runtime(format!(
                "input {path} changed since the recorded run"
            )));
        }
    }
    crate::run(manifest.args.iter().map(OsString::from).collect())?;
    let mut mismatched = Vec::new();
    for (path, digest) in &manifest.outputs {
        if file_digest(Path::new(path))? != *digest {
            mismatched.push(path.as_str());
        }
    }
    if !mismatched.is_empty() {
        return Err(CliError::Runtime(format!(
            "replayed outputs differ: {}",
            mismatched.join(", ")
        )));
    }
    eprintln!("replay: {} output(s) identical", manifest.outputs.len());
    Ok(())
}
