//! Lockstep simulation of every agent against one shared plant, trace
//! replay, and strategy verification for a loaded scenario.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::{ScenarioError, ScenarioSpec};
use crate::metric::StatePoint;
use crate::modes::{ModeRuntime, Triple};
use crate::oracle::OracleSession;
use crate::plant::ControlPoint;
use crate::seeding::derive_seed;
use crate::trace::{EventKind, Trace, TraceHeader};
use crate::verifier::{build_strategy_graph, verify_strategy, GridSpec, Sampler, VerificationReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentReport {
    pub name: String,
    pub reached_end: bool,
    /// Time the end triple was entered.
    pub finish_time: Option<f64>,
    pub final_triple: String,
    /// Kinds of every violation this agent recorded, in order.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthViolation {
    pub name: String,
    pub t: f64,
    pub state: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub agents: Vec<AgentReport>,
    pub truth_violations: Vec<TruthViolation>,
    /// A runtime or plant error that stopped the run early.
    pub error: Option<String>,
    pub steps: usize,
    pub trace: Trace,
    /// Every fine truth sample.
    pub truth: Vec<(f64, Vec<f64>)>,
    /// Parameters held over each step `[nλ, (n+1)λ]`.
    pub held_params: Vec<Vec<f64>>,
}

impl RunReport {
    /// Every agent reached its end triple with no violation of any kind.
    pub fn success(&self) -> bool {
        self.error.is_none()
            && self.truth_violations.is_empty()
            && self.agents.iter().all(|a| a.reached_end && a.violations.is_empty())
    }

    pub fn agent(&self, name: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.name == name)
    }
}

pub fn run_scenario(spec: &ScenarioSpec, seed: u64, horizon: f64) -> Result<RunReport, ScenarioError> {
    run_scenario_from(spec, seed, horizon, None)
}

fn session_for(spec: &ScenarioSpec, seed: u64, start: Option<&[f64]>) -> Result<OracleSession<f64>, ScenarioError> {
    let (Some(plant), Some(default_start)) = (&spec.plant, &spec.start) else {
        return Err(ScenarioError::NotRunnable(spec.name.clone()));
    };
    let start = match start {
        Some(x) => ControlPoint::new(StatePoint::new(x.to_vec())?, default_start.params().to_vec()),
        None => default_start.clone(),
    };
    let mut cfg = spec.oracle.clone();
    cfg.seed = seed;
    let header = TraceHeader::new(&spec.name, seed, spec.state_fields.clone());
    Ok(OracleSession::new(cfg, spec.metric.clone(), plant.clone(), start, header)?)
}

/// As [`run_scenario`], from an explicit initial true state.
pub fn run_scenario_from(
    spec: &ScenarioSpec,
    seed: u64,
    horizon: f64,
    start: Option<&[f64]>,
) -> Result<RunReport, ScenarioError> {
    if !(horizon > 0.0) {
        return Err(ScenarioError::Config(format!("horizon {horizon} must be positive")));
    }
    let mut session = session_for(spec, seed, start)?;
    let mut runtimes = Vec::with_capacity(spec.agents.len());
    for a in &spec.agents {
        let mut setup = a.setup.clone();
        setup.seed = derive_seed(seed, &a.name, 1);
        runtimes.push(ModeRuntime::new(setup)?);
    }
    let steps = (horizon / spec.oracle.lambda).ceil() as usize;
    let mut done = vec![false; runtimes.len()];
    let mut active = vec![false; spec.truth_checks.len()];
    let mut truth_violations = Vec::new();
    let mut held_params = Vec::new();
    let mut error = None;
    let mut seen = 0;
    let mut taken = 0;
    'run: for _ in 0..steps {
        for (i, (a, rt)) in spec.agents.iter().zip(runtimes.iter_mut()).enumerate() {
            if done[i] {
                continue;
            }
            let mut port = session.port_for(&a.name, a.params.clone());
            if let Err(e) = rt.step(&mut port) {
                session.record_as(&a.name, EventKind::Violation, json!({ "kind": "runtime-error", "message": e.to_string() }));
                error = Some(format!("{}: {e}", a.name));
                break 'run;
            }
            done[i] = rt.at_end() && rt.orders_finished();
        }
        if done.iter().all(|d| *d) {
            break;
        }
        held_params.push(session.params().to_vec());
        if let Err(e) = session.advance() {
            session.record_as("simulator", EventKind::Violation, json!({ "kind": "plant-error", "message": e.to_string() }));
            error = Some(e.to_string());
            break;
        }
        taken += 1;
        let mut stop = false;
        let fresh = &session.truth_history()[seen..];
        let mut hits = Vec::new();
        for (t, x) in fresh {
            for (k, check) in spec.truth_checks.iter().enumerate() {
                let hit = check.zone.member(x.coords())?;
                if hit && !active[k] {
                    hits.push(TruthViolation {
                        name: check.name.clone(),
                        t: *t,
                        state: x.coords().to_vec(),
                        terminal: check.terminal,
                    });
                    stop |= check.terminal;
                }
                active[k] = hit;
            }
        }
        seen = session.truth_history().len();
        for v in hits {
            session.record_as(
                "simulator",
                EventKind::Violation,
                json!({ "kind": v.name, "source": "truth", "t": v.t, "state": v.state }),
            );
            truth_violations.push(v);
        }
        if stop {
            break;
        }
    }
    let truth = session
        .truth_history()
        .iter()
        .map(|(t, x)| (*t, x.coords().to_vec()))
        .collect();
    let trace = session.into_trace();
    let agents = spec
        .agents
        .iter()
        .zip(&runtimes)
        .map(|(a, rt)| AgentReport {
            name: a.name.clone(),
            reached_end: rt.at_end(),
            finish_time: rt.end_time(),
            final_triple: rt.current().to_string(),
            violations: trace
                .of_kind(EventKind::Violation)
                .filter(|e| e.agent == a.name)
                .map(|e| e.payload.get("kind").and_then(Value::as_str).unwrap_or("unknown").to_string())
                .collect(),
        })
        .collect();
    Ok(RunReport {
        scenario: spec.name.clone(),
        seed,
        agents,
        truth_violations,
        error,
        steps: taken,
        trace,
        truth,
        held_params,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub measurements: usize,
    pub actuations: usize,
    pub mismatches: usize,
    /// Sequence number of the first event that did not reproduce.
    pub first_mismatch: Option<u64>,
}

impl ReplayReport {
    pub fn reproduced(&self) -> bool {
        self.mismatches == 0
    }
}

fn floats(v: Option<&Value>) -> Option<Vec<f64>> {
    v?.as_array()?.iter().map(Value::as_f64).collect()
}

/// Re-issues a trace's actuations against a fresh session with the trace
/// seed and checks that every measurement comes back identical.
pub fn replay(spec: &ScenarioSpec, trace: &Trace, start: Option<&[f64]>) -> Result<ReplayReport, ScenarioError> {
    let mut session = session_for(spec, trace.header.seed, start)?;
    let mut last: HashMap<String, Vec<f64>> = HashMap::new();
    let mut report = ReplayReport {
        measurements: 0,
        actuations: 0,
        mismatches: 0,
        first_mismatch: None,
    };
    let miss = |r: &mut ReplayReport, seq: u64| {
        r.mismatches += 1;
        r.first_mismatch.get_or_insert(seq);
    };
    for e in &trace.events {
        while session.step_index() < e.step {
            session.advance()?;
        }
        match e.kind {
            EventKind::Measure => {
                let m = session.measure_as(&e.agent)?;
                report.measurements += 1;
                if floats(e.payload.get("value")).as_deref() != Some(m.value.coords()) {
                    miss(&mut report, e.seq);
                }
                last.insert(e.agent.clone(), m.value.coords().to_vec());
            }
            EventKind::Actuate => {
                let agent = spec
                    .agent(&e.agent)
                    .ok_or_else(|| ScenarioError::Config(format!("trace names unknown agent {}", e.agent)))?;
                let params = floats(e.payload.get("params"))
                    .ok_or_else(|| ScenarioError::Config(format!("actuate event {} has no params", e.seq)))?;
                let base = last.get(&e.agent).cloned().unwrap_or_else(|| session.truth().coords().to_vec());
                let b = ControlPoint::new(StatePoint::new(base)?, params);
                let ack = session.actuate_as(&e.agent, agent.params.clone(), &b).is_ok();
                report.actuations += 1;
                if e.payload.get("ack").and_then(Value::as_bool) != Some(ack) {
                    miss(&mut report, e.seq);
                }
            }
            _ => {}
        }
    }
    Ok(report)
}

fn scaled(grid: &GridSpec<f64>, density: f64) -> Result<GridSpec<f64>, ScenarioError> {
    Ok(GridSpec::new(
        grid.spacing.iter().map(|s| s / density).collect(),
        grid.lo.clone(),
        grid.hi.clone(),
    )?)
}

/// Builds and verifies the strategy graph of the first agent. `density`
/// divides the configured grid spacing.
pub fn verify_scenario(spec: &ScenarioSpec, density: f64) -> Result<VerificationReport, ScenarioError> {
    if !(density > 0.0) || !density.is_finite() {
        return Err(ScenarioError::Config(format!("grid density {density} must be positive")));
    }
    let agent = spec
        .agents
        .first()
        .ok_or_else(|| ScenarioError::Config("scenario has no agents".into()))?;
    let sampler = Sampler {
        default: spec.sampler.default.as_ref().map(|g| scaled(g, density)).transpose()?,
        modes: spec
            .sampler
            .modes
            .iter()
            .map(|(k, g)| Ok((k.clone(), scaled(g, density)?)))
            .collect::<Result<_, ScenarioError>>()?,
    };
    let triples: Vec<Triple<f64>> = agent.setup.triples.values().cloned().collect();
    let graph = build_strategy_graph(&agent.setup.strategy, &triples, &agent.setup.transitions, &sampler)?;
    let result = verify_strategy(&graph)?;
    Ok(VerificationReport { result, graph })
}
