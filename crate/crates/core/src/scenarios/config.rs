//! The TOML scenario format.
//!
//! ```toml
//! kind = "racing"            # racing | boat | probe | toy | declared
//! name = "racing"
//!
//! [oracle]                   # epsilon, lambda, seed, fine_steps, grid_pitch
//! epsilon = 1.0
//! lambda = 0.1
//!
//! [run]
//! horizon = 400.0
//!
//! [verify]                   # sampling grid for the verifier
//! spacing = [1.0, 10.0, 5.0, 60.0]
//! lo = [0.0, 0.0, 0.0, 0.0]
//! hi = [3000.0, 120.0, 3000.0, 120.0]
//!
//! [strategy]
//! remove_edges = [["(Str,3)", "(Ben,2)"]]
//!
//! [lee]                      # overrides for `adctl lee`
//! eta = 0.2
//!
//! [racing]                   # per-kind parameters; every key optional
//! c1 = 1190.0
//! ```

use indexmap::IndexMap;
use serde::Deserialize;

use super::boat::BoatParams;
use super::probe::ProbeParams;
use super::racing::{RacingParams, PLANT_FIELDS};
use super::toy::{Declared, ToyParams};
use super::{AgentSpec, ScenarioError, ScenarioKind, ScenarioSpec};
use crate::metric::MetricSpec;
use crate::modes::TripleId;
use crate::oracle::OracleConfig;
use crate::verifier::{GridSpec, Sampler};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSection {
    epsilon: Option<f64>,
    lambda: Option<f64>,
    #[serde(default)]
    seed: u64,
    fine_steps: Option<usize>,
    grid_pitch: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    horizon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategySection {
    #[serde(default)]
    remove_edges: Vec<[TripleId; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeeSection {
    lambda: Option<f64>,
    epsilon: Option<f64>,
    eta: Option<f64>,
    samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    kind: ScenarioKind,
    name: Option<String>,
    #[serde(default)]
    oracle: OracleSection,
    #[serde(default)]
    run: RunSection,
    verify: Option<GridSpec<f64>>,
    #[serde(default)]
    strategy: StrategySection,
    #[serde(default)]
    lee: LeeSection,
    racing: Option<RacingParams>,
    boat: Option<BoatParams>,
    probe: Option<ProbeParams>,
    toy: Option<ToyParams>,
    declared: Option<Declared>,
}

struct Defaults {
    epsilon: f64,
    lambda: f64,
    horizon: f64,
}

fn defaults(kind: ScenarioKind) -> Defaults {
    let (epsilon, lambda, horizon) = match kind {
        ScenarioKind::Racing => (1.0, 0.1, 400.0),
        ScenarioKind::Boat => (0.5, 1.0, 300.0),
        ScenarioKind::Probe => (1.0, 10.0, 6000.0),
        ScenarioKind::Toy => (0.1, 1.0, 10.0),
        ScenarioKind::Declared => (1.0, 1.0, 1.0),
    };
    Defaults { epsilon, lambda, horizon }
}

/// Parses and validates a scenario, wiring plant, oracle, modes, triples
/// and strategy.
pub fn load_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let cfg: ConfigFile = toml::from_str(text)?;
    let kind = cfg.kind;
    let present = [
        ("racing", cfg.racing.is_some(), ScenarioKind::Racing),
        ("boat", cfg.boat.is_some(), ScenarioKind::Boat),
        ("probe", cfg.probe.is_some(), ScenarioKind::Probe),
        ("toy", cfg.toy.is_some(), ScenarioKind::Toy),
        ("declared", cfg.declared.is_some(), ScenarioKind::Declared),
    ];
    if let Some((section, _, _)) = present.iter().find(|(_, there, k)| *there && *k != kind) {
        return Err(ScenarioError::Config(format!("section [{section}] does not belong to kind {kind:?}")));
    }
    let d = defaults(kind);
    let mut oracle = OracleConfig::new(
        cfg.oracle.epsilon.unwrap_or(d.epsilon),
        cfg.oracle.lambda.unwrap_or(d.lambda),
        cfg.oracle.seed,
    )?;
    oracle.grid_pitch = cfg.oracle.grid_pitch;
    if let Some(n) = cfg.oracle.fine_steps {
        oracle.fine_steps = n;
    }
    oracle.validate()?;
    let horizon = cfg.run.horizon.unwrap_or(d.horizon);
    if !(horizon > 0.0) {
        return Err(ScenarioError::Config(format!("horizon {horizon} must be positive")));
    }
    let (eps, lambda, seed) = (oracle.epsilon, oracle.lambda, oracle.seed);

    let mut lee = IndexMap::new();
    let (plant, start, agents, metric, fields, sampler, truth_checks, warnings) = match kind {
        ScenarioKind::Racing => {
            let p = cfg.racing.unwrap_or_default();
            let warnings = p.validate()?;
            let (plant, start, agents) = p.build(seed);
            let fields = PLANT_FIELDS.iter().map(|s| s.to_string()).collect();
            (Some(plant), Some(start), agents, MetricSpec::euclidean(4), fields, p.sampler(), p.truth_checks(), warnings)
        }
        ScenarioKind::Boat => {
            let p = cfg.boat.unwrap_or_default();
            let warnings = p.validate()?;
            let (plant, start, agents) = p.build(eps, lambda, seed);
            let fields = super::boat::FIELDS.iter().map(|s| s.to_string()).collect();
            (Some(plant), Some(start), agents, MetricSpec::euclidean(2), fields, p.sampler(), p.truth_checks(), warnings)
        }
        ScenarioKind::Probe => {
            let p = cfg.probe.unwrap_or_default();
            let warnings = p.validate()?;
            let (plant, start, agents) = p.build(seed);
            let fields = super::probe::FIELDS.iter().map(|s| s.to_string()).collect();
            let metric = MetricSpec::new(p.metric_weights.to_vec())?;
            lee.insert("Coast".to_string(), p.lee(eps, lambda));
            (Some(plant), Some(start), agents, metric, fields, p.sampler(), p.truth_checks(), warnings)
        }
        ScenarioKind::Toy => {
            let p = cfg.toy.unwrap_or_default();
            let warnings = p.validate()?;
            let (plant, start, agents) = p.build(seed);
            lee.insert("toy".to_string(), p.lee(eps, lambda));
            let grid = GridSpec::uniform(0.1, vec![p.region[0]], vec![p.region[1]])?;
            (
                Some(plant),
                Some(start),
                agents,
                MetricSpec::euclidean(1),
                vec!["x".to_string()],
                Sampler::uniform(grid),
                Vec::new(),
                warnings,
            )
        }
        ScenarioKind::Declared => {
            let decl = cfg
                .declared
                .ok_or_else(|| ScenarioError::Config("kind declared needs a [declared] section".into()))?;
            decl.validate()?;
            let dim = decl.fields.len();
            if cfg.verify.is_none() {
                return Err(ScenarioError::Config("kind declared needs a [verify] grid".into()));
            }
            // replaced by the [verify] grid below
            let sampler = Sampler { default: None, modes: IndexMap::new() };
            let agent = decl.build(seed);
            (None, None, vec![agent], MetricSpec::euclidean(dim), decl.fields.clone(), sampler, Vec::new(), Vec::new())
        }
    };
    let sampler = match cfg.verify {
        Some(grid) => {
            grid.validate()?;
            if grid.dim() != fields.len() {
                return Err(ScenarioError::Config(format!(
                    "[verify] grid has {} axes but the state has {}",
                    grid.dim(),
                    fields.len()
                )));
            }
            Sampler::uniform(grid)
        }
        None => sampler,
    };
    let agents = remove_edges(agents, &cfg.strategy.remove_edges)?;
    for spec in lee.values_mut() {
        let o = &cfg.lee;
        spec.apply_overrides(o.lambda, o.epsilon, o.eta, o.samples);
    }
    Ok(ScenarioSpec {
        name: cfg.name.unwrap_or_else(|| format!("{kind:?}").to_lowercase()),
        kind,
        oracle,
        metric,
        plant,
        start,
        state_fields: fields,
        agents,
        horizon,
        sampler,
        truth_checks,
        lee,
        warnings,
    })
}

fn remove_edges(mut agents: Vec<AgentSpec>, edges: &[[TripleId; 2]]) -> Result<Vec<AgentSpec>, ScenarioError> {
    for [from, to] in edges {
        let mut found = false;
        for a in agents.iter_mut() {
            found |= a.setup.strategy.remove_edge(from, to);
        }
        if !found {
            return Err(ScenarioError::Config(format!("cannot remove {from} -> {to}: no such edge")));
        }
    }
    Ok(agents)
}
