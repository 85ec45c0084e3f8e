//! The per-agent mode runtime: interface, orders, controller, monitor and
//! supervisor, driven one oracle step at a time.

use std::sync::Arc;

use indexmap::IndexMap;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::orders::{Command, Interpreter};
use super::{mode_transition, ModeError, ModeSpec, Strategy, TransitionRegistry, Triple, TripleId};
use crate::metric::{MetricSpec, StatePoint};
use crate::oracle::PhysicalOracle;
use crate::plant::ControlPoint;
use crate::scalar::Scalar;
use crate::seeding::rng_for;
use crate::trace::{EventKind, Trace};
use crate::zone::Zone;

/// Turns the active command into this agent's control parameters.
pub trait Controller<T>: Send + Sync {
    fn params(&self, state_alpha: &[T], command: &Command<T>) -> Vec<T>;
}

impl<T, F> Controller<T> for F
where
    F: Fn(&[T], &Command<T>) -> Vec<T> + Send + Sync,
{
    fn params(&self, state_alpha: &[T], command: &Command<T>) -> Vec<T> {
        self(state_alpha, command)
    }
}

/// Everything a runtime needs besides the oracle.
#[derive(Clone)]
pub struct RuntimeSetup<T> {
    pub agent: String,
    pub modes: IndexMap<String, ModeSpec<T>>,
    pub triples: IndexMap<TripleId, Triple<T>>,
    pub strategy: Strategy<T>,
    pub transitions: TransitionRegistry<T>,
    pub controller: Arc<dyn Controller<T>>,
    /// Named avoidance zones in mode-state coordinates, checked against
    /// measured data grown by `2ε`.
    pub avoid: Vec<(String, Zone<T>)>,
    pub metric: MetricSpec<T>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepOutcome {
    pub transferred_to: Option<TripleId>,
    pub new_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TransferOutcome {
    Next(TripleId),
    Exhausted { steps: usize },
}

pub struct ModeRuntime<T> {
    setup: RuntimeSetup<T>,
    current: TripleId,
    state_alpha: Option<Vec<T>>,
    interp: Interpreter<T>,
    rng: ChaCha8Rng,
    active_violations: Vec<bool>,
    violated: bool,
    post_reached: bool,
    end_time: Option<T>,
}

impl<T: Scalar> ModeRuntime<T> {
    pub fn new(setup: RuntimeSetup<T>) -> Result<Self, ModeError> {
        let start = setup
            .triples
            .values()
            .find(|t| t.is_start)
            .ok_or_else(|| ModeError::Orders("no start triple".into()))?
            .clone();
        if !setup.modes.contains_key(&start.id.mode) {
            return Err(ModeError::UnknownMode(start.id.mode.clone()));
        }
        for id in setup.strategy.choices.keys().chain(setup.strategy.choices.values().flatten().map(|s| &s.target)) {
            if !setup.triples.contains_key(id) {
                return Err(ModeError::UnknownTriple(id.clone()));
            }
        }
        let rng = rng_for(setup.seed, &setup.agent, 7);
        Ok(Self {
            current: start.id.clone(),
            interp: Interpreter::new(&start.orders),
            state_alpha: None,
            rng,
            active_violations: vec![false; setup.avoid.len()],
            violated: false,
            // a start triple has its postcondition for free
            post_reached: true,
            end_time: None,
            setup,
        })
    }

    pub fn agent(&self) -> &str {
        &self.setup.agent
    }

    pub fn current(&self) -> &TripleId {
        &self.current
    }

    pub fn current_triple(&self) -> &Triple<T> {
        &self.setup.triples[&self.current]
    }

    pub fn state_alpha(&self) -> Option<&[T]> {
        self.state_alpha.as_deref()
    }

    pub fn violated(&self) -> bool {
        self.violated
    }

    pub fn at_end(&self) -> bool {
        self.current_triple().is_end
    }

    /// Time at which the end triple was entered.
    pub fn end_time(&self) -> Option<T> {
        self.end_time
    }

    pub fn orders_finished(&self) -> bool {
        self.interp.finished()
    }

    fn mode(&self) -> Result<&ModeSpec<T>, ModeError> {
        self.setup
            .modes
            .get(&self.current.mode)
            .ok_or_else(|| ModeError::UnknownMode(self.current.mode.clone()))
    }

    /// One oracle step: measure, update `state_α`, monitor, select and
    /// transfer, run the orders, actuate. Does not advance the plant.
    pub fn step<O: PhysicalOracle<T> + ?Sized>(&mut self, oracle: &mut O) -> Result<StepOutcome, ModeError> {
        let eps = oracle.epsilon();
        let lambda = oracle.lambda();
        let m = oracle.measure()?;
        let mode = self.mode()?.clone();
        if !mode.chart.member(m.value.coords())? {
            oracle.record(
                EventKind::Violation,
                json!({ "kind": "outside-mode-chart", "mode": mode.id, "triple": self.current.to_string() }),
            );
        }
        let x = mode.to_mode_state.apply(m.value.coords())?;
        oracle.record(
            EventKind::StateUpdate,
            json!({ "cause": "measure", "triple": self.current.to_string(), "state": to_f64(&x) }),
        );
        self.state_alpha = Some(x.clone());

        let new_violations = self.monitor(oracle, &x, eps)?;

        let mut transferred_to = None;
        if !self.current_triple().is_end {
            let phis = self.setup.strategy.successors(&self.current).to_vec();
            for phi in phis {
                if !phi.evaluate(&x)? {
                    continue;
                }
                let from = self.current.clone();
                oracle.record(EventKind::Select, json!({ "from": from.to_string(), "to": phi.target.to_string() }));
                let tau = self.setup.transitions.lookup(&from.mode, &phi.target.mode)?;
                let y = mode_transition(&tau, &x)?;
                oracle.record(EventKind::Transfer, json!({ "from": from.to_string(), "to": phi.target.to_string() }));
                self.current = phi.target.clone();
                self.state_alpha = Some(y.clone());
                oracle.record(
                    EventKind::StateUpdate,
                    json!({ "cause": "transfer", "triple": self.current.to_string(), "state": to_f64(&y) }),
                );
                self.interp = Interpreter::new(&self.current_triple().orders);
                self.post_reached = false;
                if self.current_triple().is_end {
                    self.end_time = Some(m.time);
                }
                self.check_post(oracle, &y)?;
                transferred_to = Some(phi.target.clone());
                break;
            }
        }

        let x = self.state_alpha.clone().unwrap_or_default();
        let fields = self.mode()?.fields.clone();
        let (command, milestones) = self.interp.tick(&fields, &x, lambda, &mut self.rng)?;
        for e in milestones {
            let mut e = e;
            e["triple"] = json!(self.current.to_string());
            oracle.record(EventKind::Orders, e);
        }
        let params = self.setup.controller.params(&x, &command);
        // π(b) is the measured state itself
        let b = ControlPoint::new(StatePoint::new(m.value.coords().to_vec())?, params);
        if let Err(e) = oracle.actuate(&b) {
            oracle.record(EventKind::Violation, json!({ "kind": "actuation-rejected", "reason": e.to_string() }));
        }
        Ok(StepOutcome {
            transferred_to,
            new_violations,
        })
    }

    fn monitor<O: PhysicalOracle<T> + ?Sized>(&mut self, oracle: &mut O, x: &[T], eps: T) -> Result<Vec<String>, ModeError> {
        let mut fresh = Vec::new();
        let grow = -(eps + eps);
        for (k, (name, zone)) in self.setup.avoid.iter().enumerate() {
            let hit = zone.contains_with(x, grow, Some(&self.setup.metric))?;
            if hit && !self.active_violations[k] {
                oracle.record(
                    EventKind::Violation,
                    json!({ "kind": name, "triple": self.current.to_string(), "state": to_f64(x), "source": "measured" }),
                );
                fresh.push(name.clone());
            }
            self.active_violations[k] = hit;
            self.violated |= hit;
        }
        self.check_post(oracle, x)?;
        Ok(fresh)
    }

    fn check_post<O: PhysicalOracle<T> + ?Sized>(&mut self, oracle: &mut O, x: &[T]) -> Result<(), ModeError> {
        if !self.post_reached && !self.violated && self.current_triple().post.member(x)? {
            self.post_reached = true;
            oracle.record(EventKind::PostReached, json!({ "triple": self.current.to_string() }));
        }
        Ok(())
    }
}

fn to_f64<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.as_f64()).collect()
}

/// Steps `runtime` (advancing the plant after each step) until a
/// selection function fires or `n_max` steps pass.
pub fn transfer_control<T: Scalar, O: PhysicalOracle<T> + ?Sized>(
    runtime: &mut ModeRuntime<T>,
    oracle: &mut O,
    n_max: usize,
) -> Result<TransferOutcome, ModeError> {
    for _ in 0..n_max {
        let out = runtime.step(oracle)?;
        oracle.advance()?;
        if let Some(id) = out.transferred_to {
            return Ok(TransferOutcome::Next(id));
        }
    }
    Ok(TransferOutcome::Exhausted { steps: n_max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditFinding {
    pub seq: u64,
    pub agent: String,
    pub reason: String,
}

/// Every `state-update` must follow a `measure` (cause measure) or a
/// `transfer` (cause transfer) by the same agent in the same step.
pub fn audit_encapsulation(trace: &Trace) -> Vec<AuditFinding> {
    let mut findings = Vec::new();
    for (i, e) in trace.events.iter().enumerate() {
        if e.kind != EventKind::StateUpdate {
            continue;
        }
        let needed = match e.payload["cause"].as_str() {
            Some("measure") => EventKind::Measure,
            Some("transfer") => EventKind::Transfer,
            other => {
                findings.push(AuditFinding {
                    seq: e.seq,
                    agent: e.agent.clone(),
                    reason: format!("state write with cause {other:?}"),
                });
                continue;
            }
        };
        let ok = trace.events[..i]
            .iter()
            .rev()
            .take_while(|p| p.step == e.step)
            .any(|p| p.agent == e.agent && p.kind == needed);
        if !ok {
            findings.push(AuditFinding {
                seq: e.seq,
                agent: e.agent.clone(),
                reason: format!("no preceding {needed:?} event in step {}", e.step),
            });
        }
    }
    findings
}
