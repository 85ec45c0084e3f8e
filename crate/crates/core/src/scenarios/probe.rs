//! A space probe in low orbit: one prograde burn, then a coast out past a
//! target radius. Units km, km/s, kg.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{check_chain, AgentSpec, LeeSpec, ScenarioError, TruthCheck};
use crate::metric::{MetricSpec, StatePoint};
use crate::modes::{
    Action, Command, CoordMap, ModeSpec, OrdersProgram, RuntimeSetup, SelectionFunction, Strategy,
    TransitionRegistry, Triple, TripleId,
};
use crate::plant::{ControlFibration, ControlPoint, TruthPlant, VectorField};
use crate::predictor::ModelSpec;
use crate::verifier::{GridSpec, Sampler};
use crate::zone::Zone;

pub const FIELDS: [&str; 7] = ["x1", "x2", "x3", "u1", "u2", "u3", "F"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub gm: f64,
    pub planet_radius: f64,
    /// Fuel burnt per unit thrust per second.
    pub fuel_constant: f64,
    pub thrust: [f64; 3],
    pub fuel: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub burn_s: f64,
    pub target_radius: f64,
    /// Per-step velocity perturbation amplitude, km/s.
    pub disturbance: f64,
    pub metric_weights: [f64; 7],
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            gm: 398_600.4,
            planet_radius: 6371.0,
            fuel_constant: 100.0,
            thrust: [0.0, 0.012, 0.0],
            fuel: 1000.0,
            position: [7000.0, 0.0, 0.0],
            velocity: [0.0, 7.546, 0.0],
            burn_s: 330.0,
            target_radius: 20_000.0,
            disturbance: 1e-7,
            metric_weights: [1.0, 1.0, 1.0, 1e6, 1e6, 1e6, 1.0],
        }
    }
}

fn norm3(v: &[f64]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl ProbeParams {
    /// Fuel left after the burn.
    pub fn fuel_after_burn(&self) -> f64 {
        self.fuel - self.fuel_constant * norm3(&self.thrust) * self.burn_s
    }

    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        check_chain(
            "radii",
            &[
                ("0", 0.0),
                ("planet_radius", self.planet_radius),
                ("|position|", norm3(&self.position)),
                ("target_radius", self.target_radius),
            ],
        )?;
        check_chain("fuel", &[("0", 0.0), ("fuel after burn", self.fuel_after_burn()), ("fuel", self.fuel + 1e-9)])?;
        if !(self.gm > 0.0 && self.fuel_constant >= 0.0 && self.burn_s >= 0.0) {
            return Err(ScenarioError::Invariant("gm must be positive, fuel_constant and burn_s non-negative".into()));
        }
        Ok(Vec::new())
    }

    pub fn gravity(&self) -> VectorField<f64> {
        let gm = self.gm;
        VectorField::new(7, move |x: &[f64], _| {
            let r = norm3(x);
            let k = -gm / (r * r * r);
            vec![x[3], x[4], x[5], k * x[0], k * x[1], k * x[2], 0.0]
        })
    }

    pub fn fibration(&self) -> ControlFibration<f64> {
        let k = self.fuel_constant;
        ControlFibration::new(
            3,
            "finite thrust, and zero thrust once the tank is empty",
            |x: &[f64], c: &[f64]| c.iter().all(|v| v.is_finite()) && (x[6] > 0.0 || c.iter().all(|v| *v == 0.0)),
            move |_, c: &[f64], _| vec![0.0, 0.0, 0.0, c[0], c[1], c[2], -k * norm3(c)],
        )
    }

    fn plant(&self) -> TruthPlant<f64> {
        let d = self.disturbance;
        let big = 1e7;
        TruthPlant::new(
            self.gravity(),
            self.fibration(),
            Zone::boxed(vec![-big, -big, -big, -100.0, -100.0, -100.0, -1.0], vec![big, big, big, 100.0, 100.0, 100.0, big]),
        )
        .with_disturbance(vec![0.0, 0.0, 0.0, d, d, d, 0.0])
    }

    fn far(&self) -> Zone<f64> {
        Zone::slice(vec![0, 1, 2], Zone::complement(Zone::ball(vec![0.0; 3], self.target_radius)))
    }

    pub fn triples(&self) -> Vec<Triple<f64>> {
        let fuel_axis = |lo: f64, hi: f64| Zone::slice(vec![6], Zone::interval(lo, hi));
        let spent = fuel_axis(f64::NEG_INFINITY, self.fuel_after_burn() + 2.0);
        let t = |mode: &str, pre: Zone<f64>, orders, post: Zone<f64>, start: bool, end: bool| Triple {
            id: TripleId::new(mode, 1),
            pre,
            orders: OrdersProgram::new(orders),
            post,
            is_start: start,
            is_end: end,
        };
        let coast = vec![Action::SetThrust { thrust: vec![0.0; 3] }];
        vec![
            t(
                "Burn",
                fuel_axis(self.fuel - 1.0, self.fuel + 1.0),
                vec![
                    Action::SetThrust { thrust: self.thrust.to_vec() },
                    Action::Wait { seconds: self.burn_s, jitter: None },
                    Action::SetThrust { thrust: vec![0.0; 3] },
                ],
                spent.clone(),
                true,
                false,
            ),
            t("Coast", spent, coast.clone(), self.far(), false, false),
            t("End", self.far(), coast, self.far(), false, true),
        ]
    }

    pub fn strategy(&self) -> Strategy<f64> {
        let mut s = Strategy::default();
        let spent = Zone::slice(vec![6], Zone::interval(f64::NEG_INFINITY, self.fuel_after_burn() + 2.0));
        s.add(TripleId::new("Burn", 1), SelectionFunction { target: TripleId::new("Coast", 1), zone: spent });
        s.add(TripleId::new("Coast", 1), SelectionFunction { target: TripleId::new("End", 1), zone: self.far() });
        s
    }

    pub fn avoid_zones(&self) -> Vec<(String, Zone<f64>)> {
        vec![
            ("planet-strike".into(), Zone::slice(vec![0, 1, 2], Zone::ball(vec![0.0; 3], self.planet_radius))),
            ("fuel-negative".into(), Zone::slice(vec![6], Zone::interval(f64::NEG_INFINITY, 0.0))),
        ]
    }

    pub fn truth_checks(&self) -> Vec<TruthCheck> {
        self.avoid_zones()
            .into_iter()
            .map(|(name, zone)| TruthCheck { name, zone, terminal: true })
            .collect()
    }

    pub fn sampler(&self) -> Sampler<f64> {
        let r = self.target_radius * 1.5;
        let grid = GridSpec::new(
            vec![r / 2.0, r / 2.0, r / 2.0, 7.5, 7.5, 7.5, 100.0],
            vec![-r, -r, -r, -15.0, -15.0, -15.0, 0.0],
            vec![r, r, r, 15.0, 15.0, 15.0, self.fuel],
        )
        .expect("static grid is valid");
        Sampler::uniform(grid)
    }

    /// One-step fit of the exact coasting model near the start state.
    pub fn lee(&self, epsilon: f64, lambda: f64) -> LeeSpec {
        let plant = self.plant();
        let mut lo: Vec<f64> = self.position.iter().chain(&self.velocity).copied().collect();
        let mut hi = lo.clone();
        for i in 0..6 {
            let w = if i < 3 { 100.0 } else { 0.1 };
            lo[i] -= w;
            hi[i] += w;
        }
        lo.push(self.fuel_after_burn());
        hi.push(self.fuel);
        LeeSpec {
            model: ModelSpec::exact(&plant, lambda / 10.0),
            truth: plant,
            control: ControlPoint::new(StatePoint::zeros(7), vec![0.0; 3]),
            region: Zone::boxed(lo, hi),
            lambda,
            epsilon,
            eta: 2.0 * epsilon,
            samples: 200,
        }
    }

    pub(crate) fn build(&self, seed: u64) -> (TruthPlant<f64>, ControlPoint<f64>, Vec<AgentSpec>) {
        let fields: Vec<String> = FIELDS.iter().map(|s| s.to_string()).collect();
        let modes: IndexMap<String, ModeSpec<f64>> = ["Burn", "Coast", "End"]
            .into_iter()
            .map(|id| {
                (
                    id.to_string(),
                    ModeSpec {
                        id: id.into(),
                        fields: fields.clone(),
                        chart: Zone::complement(Zone::Empty),
                        to_mode_state: CoordMap::Identity,
                    },
                )
            })
            .collect();
        let controller = |_: &[f64], c: &Command<f64>| match c {
            Command::Thrust { thrust } => thrust.clone(),
            _ => vec![0.0; 3],
        };
        let setup = RuntimeSetup {
            agent: "probe".into(),
            modes,
            triples: self.triples().into_iter().map(|t| (t.id.clone(), t)).collect(),
            strategy: self.strategy(),
            transitions: TransitionRegistry::shared(),
            controller: Arc::new(controller),
            avoid: self.avoid_zones(),
            metric: MetricSpec::new(self.metric_weights.to_vec()).expect("positive weights"),
            seed,
        };
        let x0: Vec<f64> = self.position.iter().chain(&self.velocity).copied().chain([self.fuel]).collect();
        let start = ControlPoint::new(StatePoint::new(x0).expect("finite"), vec![0.0; 3]);
        (
            self.plant(),
            start,
            vec![AgentSpec {
                name: "probe".into(),
                params: 0..3,
                setup,
            }],
        )
    }
}
