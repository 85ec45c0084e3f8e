use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adctl_core::predictor::{check_lee_property, LeeQuery};
use adctl_core::scenarios::{load_scenario, run_scenario, verify_scenario, ScenarioSpec};
use adctl_core::trace::{EventKind, Trace};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "adctl", version, about = "Run, verify and audit analogue-digital control scenarios")]
struct Cli {
    /// Directory searched for scenario files given by bare name.
    #[arg(long, global = true, env = "ADCTL_CONFIG_DIR")]
    config_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario; exit 1 on any violation or unfinished agent.
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Write the event trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build the strategy graph and check every path reaches an end triple.
    Verify {
        scenario: String,
        /// Sampling grid refinement; 2 halves the spacing.
        #[arg(long, default_value_t = 1.0)]
        grid_density: f64,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the strategy graph in Graphviz format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Estimate how well a mode's model tracks the plant over one step.
    Lee {
        scenario: String,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Flatten a trace to CSV, one row per measurement.
    TraceExport {
        trace: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn config_error(e: impl std::fmt::Display) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

type CmdResult = Result<u8, Failure>;

fn resolve(name: &str, dir: Option<&Path>) -> PathBuf {
    let given = PathBuf::from(name);
    if given.exists() || given.is_absolute() {
        return given;
    }
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("configs"));
    let plain = dir.join(name);
    if plain.exists() || plain.extension().is_some() {
        return plain;
    }
    dir.join(format!("{name}.toml"))
}

fn load(name: &str, dir: Option<&Path>) -> Result<ScenarioSpec, Failure> {
    let path = resolve(name, dir);
    let text = std::fs::read_to_string(&path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let spec = load_scenario(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    for w in &spec.warnings {
        eprintln!("warning: {w}");
    }
    Ok(spec)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(config_error)?;
    w.flush().map_err(config_error)
}

fn cmd_run(spec: &ScenarioSpec, seed: Option<u64>, horizon: Option<f64>, trace: Option<&Path>) -> CmdResult {
    let seed = seed.unwrap_or(spec.oracle.seed);
    let horizon = horizon.unwrap_or(spec.horizon);
    let report = run_scenario(spec, seed, horizon).map_err(config_error)?;
    if let Some(path) = trace {
        let w = create(path)?;
        report.trace.write_jsonl(w).map_err(config_error)?;
    }
    println!("scenario {} seed {seed} steps {}", report.scenario, report.steps);
    for a in &report.agents {
        let finish = a.finish_time.map_or("-".to_string(), |t| format!("{t:.2}"));
        println!(
            "  {}: reached_end={} finish={} triple={} violations={}",
            a.name,
            a.reached_end,
            finish,
            a.final_triple,
            a.violations.len()
        );
    }
    for v in &report.truth_violations {
        println!("  violation {} at t={:.2} state={:?}", v.name, v.t, v.state);
    }
    if let Some(e) = &report.error {
        println!("  error: {e}");
    }
    Ok(if report.success() { 0 } else { 1 })
}

fn cmd_verify(spec: &ScenarioSpec, density: f64, report: Option<&Path>, dot: Option<&Path>) -> CmdResult {
    let r = verify_scenario(spec, density).map_err(config_error)?;
    for v in &r.graph.vertices {
        let samples = v.report.as_ref().map_or(0, |c| c.samples);
        println!("  {} complete={} samples={samples}", v.id, v.complete);
    }
    match &r.result.counterexample {
        None => println!("verified ({} vertices visited)", r.result.vertices_visited),
        Some(cx) => println!("unverified: {}", serde_json::to_string(cx).map_err(config_error)?),
    }
    if let Some(path) = report {
        write_json(path, &serde_json::to_value(&r).map_err(config_error)?)?;
    }
    if let Some(path) = dot {
        std::fs::write(path, r.graph.to_dot()).map_err(config_error)?;
    }
    Ok(if r.result.verified { 0 } else { 1 })
}

struct LeeArgs {
    mode: Option<String>,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    eta: Option<f64>,
    samples: Option<u64>,
    seed: Option<u64>,
}

fn cmd_lee(spec: &ScenarioSpec, a: LeeArgs) -> CmdResult {
    let known: Vec<&str> = spec.lee.keys().map(String::as_str).collect();
    let mode = match &a.mode {
        Some(m) => m.clone(),
        None => known
            .first()
            .map(|m| m.to_string())
            .ok_or_else(|| config_error(format!("scenario {} has no mode to check", spec.name)))?,
    };
    let mut lee = spec
        .lee
        .get(&mode)
        .cloned()
        .ok_or_else(|| config_error(format!("no mode {mode}; known: {known:?}")))?;
    lee.apply_overrides(a.lambda, a.epsilon, a.eta, a.samples.map(|n| n as usize));
    let query = LeeQuery {
        control: &lee.control,
        lambda: lee.lambda,
        epsilon: lee.epsilon,
        eta: lee.eta,
        region: &lee.region,
        metric: &spec.metric,
        n_samples: lee.samples,
        seed: a.seed.unwrap_or(spec.oracle.seed),
    };
    let r = check_lee_property(&lee.model, &lee.truth, &query).map_err(config_error)?;
    let out = json!({
        "mode": mode,
        "lambda": r.lambda,
        "epsilon": r.epsilon,
        "eta": r.eta,
        "eta_observed": r.eta_observed,
        "samples": r.samples_used,
        "verdict": r.verdict,
        "label": r.label,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(config_error)?);
    Ok(if r.verdict { 0 } else { 1 })
}

fn cmd_trace_export(trace: &Path, out: Option<&Path>) -> CmdResult {
    let f = File::open(trace).map_err(|e| config_error(format!("{}: {e}", trace.display())))?;
    let t = Trace::read_jsonl(BufReader::new(f)).map_err(config_error)?;
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut head = vec!["sim_time".to_string(), "agent".to_string()];
    head.extend(t.header.state_fields.iter().cloned());
    head.extend(["mode".to_string(), "triple".to_string()]);
    w.write_record(&head).map_err(config_error)?;
    let mut pending: Vec<(String, f64, Vec<String>)> = Vec::new();
    for e in &t.events {
        match e.kind {
            EventKind::Measure => {
                let values = e.payload["value"]
                    .as_array()
                    .map(|v| v.iter().map(|x| x.to_string()).collect())
                    .unwrap_or_default();
                pending.retain(|(agent, ..)| agent != &e.agent);
                pending.push((e.agent.clone(), e.t, values));
            }
            EventKind::StateUpdate if e.payload["cause"] == "measure" => {
                let Some(at) = pending.iter().position(|(agent, ..)| agent == &e.agent) else {
                    continue;
                };
                let (agent, time, values) = pending.remove(at);
                let triple = e.payload["triple"].as_str().unwrap_or("");
                let mode = triple
                    .trim_start_matches('(')
                    .split(',')
                    .next()
                    .unwrap_or("");
                let mut row = vec![time.to_string(), agent];
                row.extend(values);
                row.extend([mode.to_string(), triple.to_string()]);
                w.write_record(&row).map_err(config_error)?;
            }
            _ => {}
        }
    }
    w.flush().map_err(config_error)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.config_dir.as_deref();
    let result = match cli.command {
        Command::Run { scenario, seed, horizon, trace } => {
            load(&scenario, dir).and_then(|s| cmd_run(&s, seed, horizon, trace.as_deref()))
        }
        Command::Verify { scenario, grid_density, report, dot } => load(&scenario, dir)
            .and_then(|s| cmd_verify(&s, grid_density, report.as_deref(), dot.as_deref())),
        Command::Lee { scenario, mode, lambda, epsilon, eta, samples, seed } => load(&scenario, dir).and_then(|s| {
            cmd_lee(&s, LeeArgs { mode, lambda, epsilon, eta, samples, seed })
        }),
        Command::TraceExport { trace, out } => cmd_trace_export(&trace, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
