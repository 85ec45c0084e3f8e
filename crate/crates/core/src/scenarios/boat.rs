//! A motor boat carried east by a steady flow past a round island. The
//! motor pushes north, south or not at all.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{check_chain, AgentSpec, ScenarioError, TruthCheck};
use crate::metric::{MetricSpec, StatePoint};
use crate::modes::{
    Action, Command, CoordMap, ModeSpec, OrdersProgram, RuntimeSetup, SelectionFunction, Strategy,
    TransitionRegistry, Triple, TripleId,
};
use crate::plant::{ControlFibration, ControlPoint, TruthPlant, VectorField};
use crate::verifier::{GridSpec, Sampler};
use crate::zone::Zone;

pub const FIELDS: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoatParams {
    pub flow: f64,
    pub motor: f64,
    pub island_center: [f64; 2],
    pub island_radius: f64,
    /// How far west of the island the warning region reaches.
    pub warning_depth: f64,
    /// Half-width of the rear band where either turn is safe.
    pub band: f64,
    /// Open water east of this line counts as arrival.
    pub exit_x: f64,
    pub start: [f64; 2],
}

impl Default for BoatParams {
    fn default() -> Self {
        Self {
            flow: 1.0,
            motor: 1.0,
            island_center: [0.0, 0.0],
            island_radius: 20.0,
            warning_depth: 40.0,
            band: 4.0,
            exit_x: 30.0,
            start: [-90.0, 0.0],
        }
    }
}

/// The warning zones, in absolute coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoatZones {
    pub island: Zone<f64>,
    pub warning: Zone<f64>,
    pub north: Zone<f64>,
    pub south: Zone<f64>,
    pub band: Zone<f64>,
    pub lethal: Zone<f64>,
    pub arrival: Zone<f64>,
}

impl BoatParams {
    /// Margin added to the island for the turn rules: twice the
    /// measurement error plus one step of travel.
    pub fn delta(&self, epsilon: f64, lambda: f64) -> f64 {
        2.0 * epsilon + lambda * self.flow.hypot(self.motor)
    }

    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        check_chain(
            "island",
            &[
                ("0", 0.0),
                ("island_radius", self.island_radius),
                ("island_radius*sqrt2", self.island_radius * SQRT_2),
                ("warning_depth", self.warning_depth + 1e-9),
            ],
        )?;
        check_chain("arrival", &[("centre.x", self.island_center[0]), ("exit_x", self.exit_x)])?;
        if !(self.flow > 0.0 && self.motor > 0.0 && self.band >= 0.0) {
            return Err(ScenarioError::Invariant("flow and motor must be positive, band non-negative".into()));
        }
        let mut warnings = Vec::new();
        if self.start[0] >= self.island_center[0] - self.warning_depth {
            warnings.push(format!(
                "start {:?} lies inside the warning region; the island may be unavoidable",
                self.start
            ));
        }
        if (self.flow - self.motor).abs() > 1e-12 {
            warnings.push("the lethal zone is exact only when motor speed equals flow speed".into());
        }
        Ok(warnings)
    }

    /// `n·(p - centre) <= b`.
    fn hs(&self, n: [f64; 2], b: f64) -> Zone<f64> {
        let [cx, cy] = self.island_center;
        Zone::half_space(n.to_vec(), b + n[0] * cx + n[1] * cy)
    }

    /// Points from which steering north (`sign = 1`) or south (`-1`)
    /// passes the island with clearance `r`.
    fn clear(&self, sign: f64, r: f64) -> Zone<f64> {
        let (f, m) = (self.flow, self.motor);
        let d = f.hypot(m);
        let wide = self.hs([m, -sign * f], -d * r);
        let past = Zone::intersection(vec![
            self.hs([-f, -sign * m], 0.0),
            Zone::complement(Zone::ball(self.island_center.to_vec(), r)),
        ]);
        Zone::union(vec![wide, past])
    }

    pub fn zones(&self, epsilon: f64, lambda: f64) -> BoatZones {
        let [cx, cy] = self.island_center;
        let r = self.island_radius;
        let delta = self.delta(epsilon, lambda);
        let (f, m) = (self.flow, self.motor);
        let d = f.hypot(m);
        let warning = Zone::boxed(vec![cx - self.warning_depth, cy - (r + delta)], vec![cx, cy + r + delta]);
        let lethal = Zone::intersection(vec![
            self.hs([f, m], 0.0),
            self.hs([f, -m], 0.0),
            self.hs([-m, f], d * r),
            self.hs([-m, -f], d * r),
            warning.clone(),
        ]);
        let band = Zone::intersection(vec![
            warning.clone(),
            self.clear(1.0, r + delta),
            self.clear(-1.0, r + delta),
            Zone::boxed(vec![f64::NEG_INFINITY, cy - self.band], vec![f64::INFINITY, cy + self.band]),
        ]);
        let taken = Zone::union(vec![band.clone(), lethal.clone()]);
        let north = Zone::intersection(vec![warning.clone(), self.hs([0.0, -1.0], 0.0)]).minus(taken.clone());
        let south = Zone::intersection(vec![warning.clone(), self.hs([0.0, 1.0], 0.0)]).minus(taken);
        BoatZones {
            island: Zone::ball(self.island_center.to_vec(), r),
            warning,
            north,
            south,
            band,
            lethal,
            arrival: Zone::half_space(vec![-1.0, 0.0], -self.exit_x),
        }
    }

    fn plant(&self) -> TruthPlant<f64> {
        let flow = self.flow;
        let motor = self.motor;
        TruthPlant::new(
            VectorField::new(2, move |_, _| vec![flow, 0.0]),
            ControlFibration::new(
                1,
                "motor setting in {-1, 0, 1}",
                |_, p: &[f64]| [-1.0, 0.0, 1.0].contains(&p[0]),
                move |_, p: &[f64], _| vec![0.0, motor * p[0]],
            ),
            Zone::boxed(vec![-1e4, -1e4], vec![1e4, 1e4]),
        )
    }

    pub fn triples(&self, epsilon: f64, lambda: f64) -> Vec<Triple<f64>> {
        let z = self.zones(epsilon, lambda);
        let [cx, cy] = self.island_center;
        let motor = |value: f64| vec![Action::SetMotor { value }];
        let t = |mode: &str, i: u32, pre: Zone<f64>, orders, post: Zone<f64>| Triple {
            id: TripleId::new(mode, i),
            pre,
            orders: OrdersProgram::new(orders),
            post,
            is_start: false,
            is_end: false,
        };
        let upper = Zone::half_space(vec![0.0, -1.0], -cy);
        let lower = Zone::half_space(vec![0.0, 1.0], cy);
        let outside = Zone::complement(z.warning.clone());
        let mut open = t(
            "Open",
            1,
            Zone::half_space(vec![1.0, 0.0], cx - self.warning_depth),
            motor(0.0),
            Zone::union(vec![z.warning.clone(), z.arrival.clone()]),
        );
        open.is_start = true;
        let mut end = t("End", 1, z.arrival.clone(), motor(0.0), z.arrival.clone());
        end.is_end = true;
        vec![
            open,
            t("WarnL", 1, z.lethal.clone(), motor(1.0), Zone::Empty),
            t("WarnN", 1, z.north.clone(), motor(1.0), outside.clone()),
            t("WarnS", 1, z.south.clone(), motor(-1.0), outside.clone()),
            t("WarnB", 1, Zone::intersection(vec![z.band.clone(), upper]), motor(1.0), outside.clone()),
            t("WarnB", 2, Zone::intersection(vec![z.band.clone(), lower]), motor(-1.0), outside.clone()),
            t("Open", 2, outside, motor(0.0), z.arrival.clone()),
            end,
        ]
    }

    /// Each successor box equals the successor's precondition.
    pub fn strategy(&self, triples: &[Triple<f64>]) -> Strategy<f64> {
        let pre = |id: &TripleId| triples.iter().find(|t| &t.id == id).expect("declared").pre.clone();
        let edges: [((&str, u32), (&str, u32)); 10] = [
            (("Open", 1), ("WarnL", 1)),
            (("Open", 1), ("WarnN", 1)),
            (("Open", 1), ("WarnS", 1)),
            (("Open", 1), ("WarnB", 1)),
            (("Open", 1), ("WarnB", 2)),
            (("Open", 1), ("End", 1)),
            (("WarnN", 1), ("Open", 2)),
            (("WarnS", 1), ("Open", 2)),
            (("WarnB", 1), ("Open", 2)),
            (("WarnB", 2), ("Open", 2)),
        ];
        let mut s = Strategy::default();
        for (from, to) in edges.into_iter().chain([(("Open", 2), ("End", 1))]) {
            let target = TripleId::new(to.0, to.1);
            let zone = pre(&target);
            s.add(TripleId::new(from.0, from.1), SelectionFunction { target, zone });
        }
        s
    }

    pub fn truth_checks(&self) -> Vec<TruthCheck> {
        vec![TruthCheck {
            name: "island-strike".into(),
            zone: Zone::ball(self.island_center.to_vec(), self.island_radius),
            terminal: true,
        }]
    }

    pub fn sampler(&self) -> Sampler<f64> {
        let [cx, cy] = self.island_center;
        let reach = self.warning_depth * 2.5;
        Sampler::uniform(
            GridSpec::uniform(0.5, vec![cx - reach, cy - reach], vec![cx + reach, cy + reach])
                .expect("static grid is valid"),
        )
    }

    pub(crate) fn build(&self, epsilon: f64, lambda: f64, seed: u64) -> (TruthPlant<f64>, ControlPoint<f64>, Vec<AgentSpec>) {
        let triples = self.triples(epsilon, lambda);
        let strategy = self.strategy(&triples);
        let fields: Vec<String> = FIELDS.iter().map(|s| s.to_string()).collect();
        let chart = Zone::complement(Zone::Empty);
        let modes: IndexMap<String, ModeSpec<f64>> = ["Open", "WarnL", "WarnN", "WarnS", "WarnB", "End"]
            .into_iter()
            .map(|id| {
                (
                    id.to_string(),
                    ModeSpec {
                        id: id.into(),
                        fields: fields.clone(),
                        chart: chart.clone(),
                        to_mode_state: CoordMap::Identity,
                    },
                )
            })
            .collect();
        let controller = |_: &[f64], c: &Command<f64>| match c {
            Command::Motor { value } => vec![*value],
            _ => vec![0.0],
        };
        let setup = RuntimeSetup {
            agent: "boat".into(),
            modes,
            triples: triples.into_iter().map(|t| (t.id.clone(), t)).collect(),
            strategy,
            transitions: TransitionRegistry::shared(),
            controller: Arc::new(controller),
            avoid: vec![("island-strike".into(), Zone::ball(self.island_center.to_vec(), self.island_radius))],
            metric: MetricSpec::euclidean(2),
            seed,
        };
        let start = ControlPoint::new(StatePoint::new(self.start.to_vec()).expect("finite"), vec![0.0]);
        (
            self.plant(),
            start,
            vec![AgentSpec {
                name: "boat".into(),
                params: 0..1,
                setup,
            }],
        )
    }
}
