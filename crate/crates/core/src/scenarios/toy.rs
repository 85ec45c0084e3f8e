//! One-dimensional toy plants, and scenarios whose triples and strategy are
//! declared wholesale in the config.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{AgentSpec, LeeSpec, ScenarioError};
use crate::metric::{MetricSpec, StatePoint};
use crate::modes::{
    Command, CoordMap, ModeSpec, OrdersProgram, RuntimeSetup, SelectionFunction, Strategy, TransitionRegistry,
    Triple, TripleId,
};
use crate::plant::{ControlFibration, ControlPoint, TruthPlant, VectorField};
use crate::predictor::ModelSpec;
use crate::zone::Zone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyField {
    /// `ẋ = 0`
    Static,
    /// `ẋ = x`
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyParams {
    pub field: ToyField,
    pub x0: f64,
    pub region: [f64; 2],
    pub integrator_step: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self {
            field: ToyField::Static,
            x0: 0.5,
            region: [-1.0, 1.0],
            integrator_step: 0.01,
        }
    }
}

impl ToyParams {
    pub fn drift(&self) -> VectorField<f64> {
        match self.field {
            ToyField::Static => VectorField::zero(1).with_lipschitz(0.0),
            ToyField::Exp => VectorField::new(1, |x: &[f64], _| vec![x[0]]).with_lipschitz(1.0),
        }
    }

    pub fn plant(&self) -> TruthPlant<f64> {
        TruthPlant::new(self.drift(), ControlFibration::uncontrolled(1), Zone::interval(-1e6, 1e6))
    }

    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        super::check_chain("region", &[("region.lo", self.region[0]), ("region.hi", self.region[1])])?;
        if !(self.integrator_step > 0.0) {
            return Err(ScenarioError::Invariant("integrator_step must be positive".into()));
        }
        Ok(Vec::new())
    }

    pub fn lee(&self, epsilon: f64, lambda: f64) -> LeeSpec {
        let plant = self.plant();
        LeeSpec {
            model: ModelSpec::exact(&plant, self.integrator_step.min(lambda)),
            truth: plant,
            control: ControlPoint::new(StatePoint::zeros(1), vec![]),
            region: Zone::interval(self.region[0], self.region[1]),
            lambda,
            epsilon,
            eta: 2.0 * epsilon,
            samples: 1000,
        }
    }

    pub(crate) fn build(&self, seed: u64) -> (TruthPlant<f64>, ControlPoint<f64>, Vec<AgentSpec>) {
        let all = Zone::complement(Zone::Empty);
        let triple = Triple {
            id: TripleId::new("toy", 1),
            pre: all.clone(),
            orders: OrdersProgram::default(),
            post: all,
            is_start: true,
            is_end: true,
        };
        let setup = declared_setup("toy", vec!["x".into()], vec![triple], Strategy::default(), seed);
        let start = ControlPoint::new(StatePoint::new(vec![self.x0]).expect("finite"), vec![]);
        (self.plant(), start, vec![AgentSpec { name: "toy".into(), params: 0..0, setup }])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredTriple {
    pub id: TripleId,
    pub pre: Zone<f64>,
    pub post: Zone<f64>,
    #[serde(default)]
    pub start: bool,
    #[serde(default)]
    pub end: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredEdge {
    pub from: TripleId,
    pub to: TripleId,
    pub select: Zone<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Declared {
    pub fields: Vec<String>,
    #[serde(default)]
    pub triples: Vec<DeclaredTriple>,
    #[serde(default)]
    pub edges: Vec<DeclaredEdge>,
}

impl Declared {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let dim = self.fields.len();
        for t in &self.triples {
            t.pre.validate(dim)?;
            t.post.validate(dim)?;
        }
        for e in &self.edges {
            e.select.validate(dim)?;
            for id in [&e.from, &e.to] {
                if !self.triples.iter().any(|t| &t.id == id) {
                    return Err(ScenarioError::Config(format!("edge mentions undeclared triple {id}")));
                }
            }
        }
        if !self.triples.iter().any(|t| t.start) {
            return Err(ScenarioError::Config("no start triple declared".into()));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> AgentSpec {
        let triples = self
            .triples
            .iter()
            .map(|t| Triple {
                id: t.id.clone(),
                pre: t.pre.clone(),
                orders: OrdersProgram::default(),
                post: t.post.clone(),
                is_start: t.start,
                is_end: t.end,
            })
            .collect();
        let mut strategy = Strategy::default();
        for e in &self.edges {
            strategy.add(e.from.clone(), SelectionFunction { target: e.to.clone(), zone: e.select.clone() });
        }
        AgentSpec {
            name: "strategy".into(),
            params: 0..0,
            setup: declared_setup("strategy", self.fields.clone(), triples, strategy, seed),
        }
    }
}

fn declared_setup(
    agent: &str,
    fields: Vec<String>,
    triples: Vec<Triple<f64>>,
    strategy: Strategy<f64>,
    seed: u64,
) -> RuntimeSetup<f64> {
    let dim = fields.len();
    let mut modes = IndexMap::new();
    for t in &triples {
        modes.entry(t.id.mode.clone()).or_insert_with(|| ModeSpec {
            id: t.id.mode.clone(),
            fields: fields.clone(),
            chart: Zone::complement(Zone::Empty),
            to_mode_state: CoordMap::Identity,
        });
    }
    RuntimeSetup {
        agent: agent.into(),
        modes,
        triples: triples.into_iter().map(|t| (t.id.clone(), t)).collect(),
        strategy,
        transitions: TransitionRegistry::shared(),
        controller: Arc::new(|_: &[f64], _: &Command<f64>| Vec::new()),
        avoid: Vec::new(),
        metric: MetricSpec::euclidean(dim),
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_fields() {
        let s = ToyParams::default().drift();
        assert_eq!(s.eval(&[3.0], 0.0), vec![0.0]);
        let e = ToyParams { field: ToyField::Exp, ..Default::default() }.drift();
        assert_eq!(e.eval(&[3.0], 0.0), vec![3.0]);
    }

    #[test]
    fn declared_rejects_dangling_edge() {
        let d = Declared {
            fields: vec!["x".into()],
            triples: vec![DeclaredTriple {
                id: TripleId::new("a", 1),
                pre: Zone::interval(0.0, 1.0),
                post: Zone::interval(0.0, 1.0),
                start: true,
                end: false,
            }],
            edges: vec![DeclaredEdge {
                from: TripleId::new("a", 1),
                to: TripleId::new("b", 1),
                select: Zone::interval(0.0, 1.0),
            }],
        };
        assert!(d.validate().unwrap_err().to_string().contains("(b,1)"));
    }
}
