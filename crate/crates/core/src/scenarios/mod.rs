//! The case studies as runnable configurations, and the engine that steps
//! plant, oracle and mode runtimes together.

use std::ops::Range;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{GeometryError, MetricSpec};
use crate::modes::{ModeError, RuntimeSetup};
use crate::oracle::{OracleConfig, OracleError};
use crate::plant::{ControlPoint, TruthPlant};
use crate::predictor::{ModelSpec, PredictError};
use crate::verifier::{Sampler, VerifyError};
use crate::zone::Zone;

pub mod boat;
pub mod config;
pub mod engine;
pub mod probe;
pub mod racing;
pub mod toy;

pub use config::load_scenario;
pub use engine::{replay, run_scenario, run_scenario_from, verify_scenario, AgentReport, ReplayReport, RunReport, TruthViolation};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config: {0}")]
    Config(String),
    /// A parameter ordering or design rule failed; the message spells out
    /// the chain with the offending values.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("scenario {0} has no plant and cannot be run")]
    NotRunnable(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Racing,
    Boat,
    Probe,
    Toy,
    /// Triples and strategy declared directly; verification only.
    Declared,
}

/// One controlling program and the slice of control parameters it owns.
#[derive(Clone)]
pub struct AgentSpec {
    pub name: String,
    pub params: Range<usize>,
    pub setup: RuntimeSetup<f64>,
}

/// A simulator-side safety check on the true state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthCheck {
    pub name: String,
    /// In plant coordinates.
    pub zone: Zone<f64>,
    /// Stops the run when entered.
    pub terminal: bool,
}

/// What `adctl lee` checks for one mode.
#[derive(Debug, Clone)]
pub struct LeeSpec {
    pub model: ModelSpec<f64>,
    pub truth: TruthPlant<f64>,
    pub control: ControlPoint<f64>,
    pub region: Zone<f64>,
    pub lambda: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub samples: usize,
}

impl LeeSpec {
    /// A new `epsilon` resets `eta` to `2ε` unless `eta` is also given.
    pub fn apply_overrides(&mut self, lambda: Option<f64>, epsilon: Option<f64>, eta: Option<f64>, samples: Option<usize>) {
        if let Some(v) = lambda {
            self.lambda = v;
            self.model.integrator_step = self.model.integrator_step.min(v);
        }
        if let Some(v) = epsilon {
            self.epsilon = v;
            self.eta = 2.0 * v;
        }
        if let Some(v) = eta {
            self.eta = v;
        }
        if let Some(v) = samples {
            self.samples = v;
        }
    }
}

#[derive(Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub kind: ScenarioKind,
    pub oracle: OracleConfig<f64>,
    pub metric: MetricSpec<f64>,
    pub plant: Option<TruthPlant<f64>>,
    /// Initial true state and parameters.
    pub start: Option<ControlPoint<f64>>,
    /// Names of the plant coordinates, for trace headers and exports.
    pub state_fields: Vec<String>,
    pub agents: Vec<AgentSpec>,
    pub horizon: f64,
    pub sampler: Sampler<f64>,
    pub truth_checks: Vec<TruthCheck>,
    pub lee: IndexMap<String, LeeSpec>,
    pub warnings: Vec<String>,
}

impl ScenarioSpec {
    pub fn runnable(&self) -> bool {
        self.plant.is_some() && self.start.is_some()
    }

    pub fn agent(&self, name: &str) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.name == name)
    }
}

/// `a < b < c …` over named values; the error names the first broken link.
pub(crate) fn check_chain(label: &str, chain: &[(&str, f64)]) -> Result<(), ScenarioError> {
    for w in chain.windows(2) {
        if !(w[0].1 < w[1].1) {
            let rendered: Vec<String> = chain.iter().map(|(n, v)| format!("{n}={v}")).collect();
            return Err(ScenarioError::Invariant(format!(
                "{label}: need {} < {} but {} >= {} in chain {}",
                w[0].0,
                w[1].0,
                w[0].1,
                w[1].1,
                rendered.join(" < ")
            )));
        }
    }
    Ok(())
}

/// `Box` over selected coordinates of a `dim`-dimensional space, unbounded
/// elsewhere.
pub(crate) fn bounds_on(dim: usize, axes: &[(usize, f64, f64)]) -> Zone<f64> {
    let mut lo = vec![f64::NEG_INFINITY; dim];
    let mut hi = vec![f64::INFINITY; dim];
    for (i, l, h) in axes {
        lo[*i] = *l;
        hi[*i] = *h;
    }
    Zone::boxed(lo, hi)
}
