//! The physical oracle: the only channel between an algorithm and the
//! plant. Measurements come back within `ε` of the truth and snapped to a
//! rational grid; actuation requests are checked against the fibration.
//!
//! [`OracleSession`] is the simulator side and holds the truth.
//! Algorithms see it only through [`PhysicalOracle`], which exposes
//! measurements, acknowledgements and the clock.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::metric::{check_dim, GeometryError, MetricSpec, StatePoint};
use crate::plant::{evolve, ControlPoint, PlantError, Trajectory, TruthPlant};
use crate::scalar::Scalar;
use crate::seeding::{derive_seed, unit_ball};
use crate::trace::{EventKind, Trace, TraceHeader};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle configuration: {0}")]
    Config(String),
    #[error("measurement step {step} outside the truth span [{start}, {end}]")]
    OutOfRange { step: usize, start: f64, end: f64 },
    #[error("actuation rejected at step {step}: requires {rule}")]
    Rejected { step: usize, rule: String },
    #[error("plant at step {step}: {source}")]
    Plant {
        step: usize,
        #[source]
        source: PlantError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig<T> {
    pub epsilon: T,
    pub lambda: T,
    pub seed: u64,
    /// Measurement grid pitch in metric units; `ε/100` when absent.
    #[serde(default)]
    pub grid_pitch: Option<T>,
    /// Fine truth steps per oracle step.
    #[serde(default = "default_fine_steps")]
    pub fine_steps: usize,
}

fn default_fine_steps() -> usize {
    10
}

impl<T: Scalar> OracleConfig<T> {
    pub fn new(epsilon: T, lambda: T, seed: u64) -> Result<Self, OracleError> {
        let cfg = Self {
            epsilon,
            lambda,
            seed,
            grid_pitch: None,
            fine_steps: default_fine_steps(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(OracleError::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return Err(OracleError::Config(format!("lambda {} must be positive", self.lambda)));
        }
        if let Some(p) = self.grid_pitch {
            if !(p > T::zero()) || p > self.epsilon {
                return Err(OracleError::Config(format!("grid pitch {p} must lie in (0, epsilon]")));
            }
        }
        if self.fine_steps < 10 {
            return Err(OracleError::Config(format!(
                "fine_steps {} must be at least 10",
                self.fine_steps
            )));
        }
        Ok(())
    }

    pub fn pitch(&self) -> T {
        self.grid_pitch.unwrap_or(self.epsilon / T::of(100.0))
    }

    pub fn fine_dt(&self) -> T {
        self.lambda / T::of(self.fine_steps as f64)
    }

    /// Radius of the perturbation ball, leaving room for the snap so the
    /// reported value stays strictly inside the ε-ball.
    pub fn perturbation_radius(&self, dim: usize) -> T {
        let p = self.pitch();
        let snap = p * T::of(dim as f64).sqrt() / T::of(2.0);
        (self.epsilon - p.max(snap)).max(T::zero())
    }
}

/// `m(nλ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement<T> {
    pub step_index: usize,
    pub time: T,
    pub value: StatePoint<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ack<T> {
    pub step_index: usize,
    pub time: T,
    pub params: Vec<T>,
}

/// Rounds each coordinate to the measurement grid, whose per-axis pitch is
/// `pitch / sqrt(w_i)` so that the grid is uniform under the metric.
pub fn snap_to_grid<T: Scalar>(x: &[T], metric: &MetricSpec<T>, pitch: T) -> Vec<T> {
    x.iter()
        .zip(metric.weights())
        .map(|(v, w)| {
            let p = pitch / w.sqrt();
            (*v / p).round() * p
        })
        .collect()
}

fn perturbed<T: Scalar>(
    cfg: &OracleConfig<T>,
    metric: &MetricSpec<T>,
    truth: &[T],
    rng_seed: u64,
) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let r = cfg.perturbation_radius(truth.len());
    let u = unit_ball(&mut rng, truth.len());
    let raw: Vec<T> = truth
        .iter()
        .zip(metric.weights())
        .zip(&u)
        .map(|((x, w), ui)| *x + r * T::of(*ui) / w.sqrt())
        .collect();
    snap_to_grid(&raw, metric, cfg.pitch())
}

/// Pure measurement of a recorded truth trajectory at step `n`.
pub fn measure<T: Scalar>(
    cfg: &OracleConfig<T>,
    metric: &MetricSpec<T>,
    truth: &Trajectory<T>,
    n: usize,
) -> Result<Measurement<T>, OracleError> {
    let time = cfg.lambda * T::of(n as f64);
    let state = truth.at(time).ok_or(OracleError::OutOfRange {
        step: n,
        start: truth.start_time.as_f64(),
        end: truth.end_time().as_f64(),
    })?;
    check_dim("truth state", metric.dim(), state.dim())?;
    let value = perturbed(cfg, metric, state.coords(), derive_seed(cfg.seed, "measure", n as u64));
    Ok(Measurement {
        step_index: n,
        time,
        value: StatePoint::new(value)?,
    })
}

/// What an algorithm may do with the world.
pub trait PhysicalOracle<T: Scalar> {
    fn lambda(&self) -> T;
    fn epsilon(&self) -> T;
    fn step_index(&self) -> usize;
    fn time(&self) -> T {
        self.lambda() * T::of(self.step_index() as f64)
    }
    /// Name under which this caller's events are logged.
    fn agent(&self) -> &str;
    fn measure(&mut self) -> Result<Measurement<T>, OracleError>;
    /// Requests the parameters of `b`, admissibility checked at `π(b)`.
    fn actuate(&mut self, b: &ControlPoint<T>) -> Result<Ack<T>, OracleError>;
    /// Parameters currently held for this caller.
    fn current_params(&self) -> Vec<T>;
    /// Lets the plant run for one step `λ`.
    fn advance(&mut self) -> Result<(), OracleError>;
    /// Appends a non-oracle event (selection, transfer, ...) to the run log.
    fn record(&mut self, kind: EventKind, payload: Value);
}

/// Simulator-side session: truth state, held parameters, RNG streams and
/// the run trace.
#[derive(Debug, Clone)]
pub struct OracleSession<T> {
    cfg: OracleConfig<T>,
    metric: MetricSpec<T>,
    plant: TruthPlant<T>,
    state: StatePoint<T>,
    params: Vec<T>,
    step: usize,
    queries: u64,
    history: Vec<(T, StatePoint<T>)>,
    trace: Trace,
}

impl<T: Scalar> OracleSession<T> {
    pub fn new(
        cfg: OracleConfig<T>,
        metric: MetricSpec<T>,
        plant: TruthPlant<T>,
        start: ControlPoint<T>,
        header: TraceHeader,
    ) -> Result<Self, OracleError> {
        cfg.validate()?;
        check_dim("metric", plant.dim(), metric.dim())?;
        check_dim("start state", plant.dim(), start.pi().dim())?;
        if !plant.fibration.is_admissible(start.pi().coords(), start.params()) {
            return Err(OracleError::Rejected {
                step: 0,
                rule: plant.fibration.rule().to_string(),
            });
        }
        plant
            .check_chart(start.pi().coords(), T::zero())
            .map_err(|source| OracleError::Plant { step: 0, source })?;
        Ok(Self {
            history: vec![(T::zero(), start.pi().clone())],
            state: start.pi().clone(),
            params: start.params().to_vec(),
            cfg,
            metric,
            plant,
            step: 0,
            queries: 0,
            trace: Trace::new(header),
        })
    }

    pub fn config(&self) -> &OracleConfig<T> {
        &self.cfg
    }

    pub fn metric(&self) -> &MetricSpec<T> {
        &self.metric
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Simulator-only: current true state.
    pub fn truth(&self) -> &StatePoint<T> {
        &self.state
    }

    /// Simulator-only: every fine truth sample so far.
    pub fn truth_history(&self) -> &[(T, StatePoint<T>)] {
        &self.history
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> T {
        self.cfg.lambda * T::of(self.step as f64)
    }

    pub fn measure_as(&mut self, agent: &str) -> Result<Measurement<T>, OracleError> {
        let seed = derive_seed(self.cfg.seed, agent, ((self.step as u64) << 16) ^ self.queries);
        self.queries += 1;
        let value = StatePoint::new(perturbed(&self.cfg, &self.metric, self.state.coords(), seed))?;
        let m = Measurement {
            step_index: self.step,
            time: self.time(),
            value,
        };
        let coords: Vec<f64> = m.value.coords().iter().map(|v| v.as_f64()).collect();
        self.trace.push(
            self.step,
            m.time.as_f64(),
            agent,
            EventKind::Measure,
            json!({ "value": coords }),
        );
        Ok(m)
    }

    /// Sets `params[range]` from `b`, checking the full parameter vector.
    pub fn actuate_as(
        &mut self,
        agent: &str,
        range: std::ops::Range<usize>,
        b: &ControlPoint<T>,
    ) -> Result<Ack<T>, OracleError> {
        let mut full = self.params.clone();
        let accepted = b.params().len() == range.len() && range.end <= full.len() && {
            full[range.clone()].copy_from_slice(b.params());
            self.plant.fibration.is_admissible(b.pi().coords(), &full)
        };
        let requested: Vec<f64> = b.params().iter().map(|v| v.as_f64()).collect();
        let t = self.time();
        if !accepted {
            self.trace.push(
                self.step,
                t.as_f64(),
                agent,
                EventKind::Actuate,
                json!({ "params": requested, "ack": false, "rule": self.plant.fibration.rule() }),
            );
            return Err(OracleError::Rejected {
                step: self.step,
                rule: self.plant.fibration.rule().to_string(),
            });
        }
        self.params = full;
        self.trace.push(
            self.step,
            t.as_f64(),
            agent,
            EventKind::Actuate,
            json!({ "params": requested, "ack": true }),
        );
        Ok(Ack {
            step_index: self.step,
            time: t,
            params: b.params().to_vec(),
        })
    }

    /// Runs the truth over `[nλ, (n+1)λ]` with the held parameters.
    pub fn advance(&mut self) -> Result<(), OracleError> {
        let t0 = self.time();
        let t1 = self.cfg.lambda * T::of((self.step + 1) as f64);
        let c = ControlPoint::new(self.state.clone(), self.params.clone());
        let seed = derive_seed(self.cfg.seed, "plant", self.step as u64);
        let step = self.step;
        let tr = evolve(&self.plant, &c, t0, t1, self.cfg.fine_dt(), seed)
            .map_err(|source| OracleError::Plant { step, source })?;
        for (k, s) in tr.states.iter().enumerate().skip(1) {
            self.history.push((tr.time_of(k), s.clone()));
        }
        self.state = tr.last().clone();
        self.step += 1;
        self.queries = 0;
        Ok(())
    }

    pub fn record_as(&mut self, agent: &str, kind: EventKind, payload: Value) {
        let t = self.time().as_f64();
        self.trace.push(self.step, t, agent, kind, payload);
    }

    /// The whole-system port, for single-agent runs.
    pub fn port(&mut self, agent: &str) -> AgentPort<'_, T> {
        let n = self.params.len();
        AgentPort {
            session: self,
            agent: agent.to_string(),
            range: 0..n,
        }
    }

    /// A port owning the parameter slice `range` (one car of two).
    pub fn port_for(&mut self, agent: &str, range: std::ops::Range<usize>) -> AgentPort<'_, T> {
        AgentPort {
            session: self,
            agent: agent.to_string(),
            range,
        }
    }
}

/// One agent's view of a session.
pub struct AgentPort<'a, T> {
    session: &'a mut OracleSession<T>,
    agent: String,
    range: std::ops::Range<usize>,
}

impl<T: Scalar> PhysicalOracle<T> for AgentPort<'_, T> {
    fn lambda(&self) -> T {
        self.session.cfg.lambda
    }

    fn epsilon(&self) -> T {
        self.session.cfg.epsilon
    }

    fn step_index(&self) -> usize {
        self.session.step
    }

    fn agent(&self) -> &str {
        &self.agent
    }

    fn measure(&mut self) -> Result<Measurement<T>, OracleError> {
        self.session.measure_as(&self.agent)
    }

    fn actuate(&mut self, b: &ControlPoint<T>) -> Result<Ack<T>, OracleError> {
        self.session.actuate_as(&self.agent, self.range.clone(), b)
    }

    fn current_params(&self) -> Vec<T> {
        self.session.params[self.range.clone()].to_vec()
    }

    fn advance(&mut self) -> Result<(), OracleError> {
        self.session.advance()
    }

    fn record(&mut self, kind: EventKind, payload: Value) {
        self.session.record_as(&self.agent, kind, payload);
    }
}
