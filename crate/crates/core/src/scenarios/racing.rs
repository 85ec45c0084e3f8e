//! Two cars on a one-lane-each track with two bends and a single-file
//! chicane. Speeds in km/h, positions in m.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{bounds_on, check_chain, AgentSpec, ScenarioError, TruthCheck};
use crate::metric::{MetricSpec, StatePoint};
use crate::modes::{
    Action, Command, Condition, CoordMap, ModeSpec, OrdersProgram, RuntimeSetup, SelectionFunction, Strategy,
    TransitionRegistry, Triple, TripleId,
};
use crate::plant::{ControlFibration, ControlPoint, TruthPlant, VectorField};
use crate::verifier::{GridSpec, Sampler};
use crate::zone::Zone;

pub const FIELDS: [&str; 4] = ["x", "v", "x_other", "v_other"];
pub const PLANT_FIELDS: [&str; 4] = ["x1", "v1", "x2", "v2"];

const X: usize = 0;
const V: usize = 1;
const XO: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RacingParams {
    pub track_length: f64,
    pub v_max: f64,
    pub v_bend: f64,
    /// Target speed through the bends.
    pub bend_speed: f64,
    pub bend1: [f64; 2],
    pub bend2: [f64; 2],
    pub chicane: [f64; 2],
    pub finish: f64,
    pub d1: f64,
    pub h1: f64,
    pub e1: f64,
    pub e2: f64,
    pub h2: f64,
    pub d2: f64,
    pub g1: f64,
    pub k1: f64,
    pub k2: f64,
    pub c1: f64,
    pub k3: f64,
    pub k4: f64,
    pub g2: f64,
    /// Give-way iterations of `wait_step` seconds for car 1.
    pub timelimit: u32,
    pub wait_step: f64,
    /// Acceleration and braking limits, km/h per s.
    pub accel: f64,
    pub brake: f64,
    pub gain: f64,
    pub ramp_speed: f64,
    pub ramp_s: f64,
    pub launch_jitter: f64,
    pub brake1: f64,
    pub brake2: f64,
}

impl Default for RacingParams {
    fn default() -> Self {
        Self {
            track_length: 3000.0,
            v_max: 120.0,
            v_bend: 80.0,
            bend_speed: 65.0,
            bend1: [700.0, 900.0],
            bend2: [2200.0, 2400.0],
            chicane: [1600.0, 1660.0],
            finish: 2800.0,
            d1: 1503.0,
            h1: 1507.0,
            e1: 1511.0,
            e2: 1525.0,
            h2: 1530.0,
            d2: 1535.0,
            g1: 1130.0,
            k1: 1150.0,
            k2: 1170.0,
            c1: 1190.0,
            k3: 1672.0,
            k4: 1690.0,
            g2: 1700.0,
            timelimit: 30,
            wait_step: 1.0,
            accel: 20.0,
            brake: 36.0,
            gain: 5.0,
            ramp_speed: 100.0,
            ramp_s: 5.0,
            launch_jitter: 20.0,
            brake1: 550.0,
            brake2: 2050.0,
        }
    }
}

fn ms(kmh: f64) -> f64 {
    kmh / 3.6
}

impl RacingParams {
    pub fn begin_chicane(&self) -> f64 {
        self.chicane[0]
    }

    pub fn end_chicane(&self) -> f64 {
        self.chicane[1]
    }

    /// Distance to a full stop from `v` km/h under full braking.
    pub fn stop_distance(&self, v: f64) -> f64 {
        ms(v).powi(2) / (2.0 * ms(self.brake))
    }

    /// Time to cover `s` metres from rest under the launch profile: a
    /// linear ramp to `ramp_speed` over `ramp_s`, then constant speed.
    pub fn profile_time(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let vr = ms(self.ramp_speed);
        let a = vr / self.ramp_s;
        let ramp_dist = 0.5 * vr * self.ramp_s;
        if s <= ramp_dist {
            (2.0 * s / a).sqrt()
        } else {
            self.ramp_s + (s - ramp_dist) / vr
        }
    }

    /// Longest a give-way car may need to wait: a car starting from rest
    /// at `g1 - 1` clears the chicane within this time.
    pub fn chicane_wait_bound(&self) -> f64 {
        self.profile_time(self.end_chicane() - (self.g1 - 1.0))
    }

    /// `(t1, t2)`: car 1 from rest at `d2 - 2` clearing `end + 2`, and
    /// car 2 at constant `car2_speed` from `c1 + 2` reaching `begin - 2`.
    pub fn catch_times(&self, car2_speed: f64) -> (f64, f64) {
        let t1 = self.profile_time(self.end_chicane() + 2.0 - (self.d2 - 2.0));
        let gap = self.begin_chicane() - 2.0 - (self.c1 + 2.0);
        let t2 = if car2_speed <= 0.0 {
            f64::INFINITY
        } else if gap <= 0.0 {
            0.0
        } else {
            gap / ms(car2_speed)
        };
        (t1, t2)
    }

    pub fn catch_check_with(&self, car2_speed: f64) -> bool {
        let (t1, t2) = self.catch_times(car2_speed);
        t1 < t2
    }

    /// Car 2 at top speed from `c1 + 2` cannot catch car 1 in the chicane.
    pub fn catch_check(&self) -> bool {
        self.catch_check_with(self.v_max)
    }

    /// Checks every ordering and design rule; returns warnings.
    pub fn validate(&self) -> Result<Vec<String>, ScenarioError> {
        let [a1, b1] = self.bend1;
        let [a2, b2] = self.bend2;
        let (begin, end) = (self.begin_chicane(), self.end_chicane());
        check_chain(
            "speeds",
            &[("0", 0.0), ("bend_speed+7", self.bend_speed + 7.0), ("v_bend", self.v_bend), ("v_max", self.v_max + 1e-9)],
        )?;
        check_chain(
            "first straight",
            &[("100", 100.0), ("brake1", self.brake1), ("bend1.lo-100", a1 - 100.0), ("bend1.hi", b1)],
        )?;
        check_chain("approach", &[("bend1.hi+200", b1 + 200.0), ("d1", self.d1)])?;
        check_chain(
            "approach band",
            &[
                ("d1", self.d1),
                ("h1", self.h1),
                ("e1", self.e1),
                ("e2", self.e2),
                ("h2", self.h2),
                ("d2", self.d2),
            ],
        )?;
        check_chain(
            "give-way band",
            &[
                ("g1", self.g1),
                ("k1", self.k1),
                ("k2", self.k2),
                ("c1", self.c1),
                ("end_chicane+2", end + 2.0),
                ("k3", self.k3),
                ("k4", self.k4),
                ("g2", self.g2),
            ],
        )?;
        let halt = self.d2 + 1.0 + self.stop_distance(self.v_max);
        check_chain("braking rule", &[("d2+1+stop", halt), ("begin_chicane-1", begin - 1.0)])?;
        check_chain(
            "second straight",
            &[("end_chicane+70", end + 70.0), ("brake2", self.brake2), ("bend2.lo-100", a2 - 100.0), ("bend2.hi", b2)],
        )?;
        check_chain(
            "finish",
            &[("bend2.hi+200", b2 + 200.0), ("finish", self.finish), ("finish+100", self.finish + 100.0), ("L", self.track_length + 1e-9)],
        )?;
        if !(self.accel > 0.0 && self.brake > 0.0 && self.gain > 0.0 && self.ramp_s > 0.0 && self.wait_step > 0.0) {
            return Err(ScenarioError::Invariant(
                "accel, brake, gain, ramp_s and wait_step must be positive".into(),
            ));
        }
        if !self.catch_check() {
            let (t1, t2) = self.catch_times(self.v_max);
            return Err(ScenarioError::Invariant(format!(
                "c1={} unsafe: car 1 needs {t1:.2} s to clear end_chicane+2 but car 2 reaches begin_chicane-2 in {t2:.2} s",
                self.c1
            )));
        }
        let mut warnings = Vec::new();
        let bound = self.chicane_wait_bound();
        let limit = self.timelimit as f64 * self.wait_step;
        if limit < bound {
            warnings.push(format!(
                "give-way timelimit {limit} s is below the chicane wait bound {bound:.2} s"
            ));
        }
        Ok(warnings)
    }

    fn plant(&self) -> TruthPlant<f64> {
        let drift = VectorField::new(4, |x: &[f64], _| vec![ms(x[1]), 0.0, ms(x[3]), 0.0]);
        let (lo, hi) = (-self.brake, self.accel);
        let fib = ControlFibration::new(
            2,
            format!("each car's acceleration in [{lo}, {hi}] km/h/s"),
            move |_, p: &[f64]| p.iter().all(|a| a.is_finite() && *a >= lo && *a <= hi),
            |_, p: &[f64], _| vec![0.0, p[0], 0.0, p[1]],
        );
        let l = self.track_length;
        let chart = bounds_on(4, &[(0, -100.0, l + 1000.0), (2, -100.0, l + 1000.0)]);
        TruthPlant::new(drift, fib, chart).with_saturation(
            vec![f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 0.0],
            vec![f64::INFINITY, self.v_max, f64::INFINITY, self.v_max],
        )
    }

    fn controller(&self) -> impl Fn(&[f64], &Command<f64>) -> Vec<f64> + Send + Sync + 'static {
        let (gain, accel, brake) = (self.gain, self.accel, self.brake);
        move |x: &[f64], c: &Command<f64>| {
            let a = match c {
                Command::TargetSpeed { speed, rate } => {
                    let up = rate.unwrap_or(accel).min(accel);
                    (gain * (speed - x[V])).clamp(-brake, up)
                }
                Command::Brake => -brake,
                _ => 0.0,
            };
            vec![a]
        }
    }

    fn modes(&self, map: &CoordMap<f64>, x_axis: usize) -> IndexMap<String, ModeSpec<f64>> {
        let fields: Vec<String> = FIELDS.iter().map(|s| s.to_string()).collect();
        let l = self.track_length;
        let track = Zone::slice(vec![x_axis], Zone::interval(-100.0, l + 1000.0));
        let chicane_zone = Zone::slice(vec![x_axis], Zone::interval(self.d1 - 3.0, self.end_chicane() + 100.0));
        let mut modes = IndexMap::new();
        for (id, chart) in [
            ("Sta", &track),
            ("Str", &track),
            ("Ben", &track),
            ("Ch.rt", &chicane_zone),
            ("Ch.gw", &chicane_zone),
            ("End", &track),
        ] {
            modes.insert(
                id.to_string(),
                ModeSpec {
                    id: id.into(),
                    fields: fields.clone(),
                    chart: chart.clone(),
                    to_mode_state: map.clone(),
                },
            );
        }
        modes
    }

    /// The eleven triples, in mode-state coordinates. `give_way_limit` is the
    /// iteration cap of the give-way wait (`None` waits indefinitely).
    /// No validation: callers may build deliberately broken variants.
    pub fn triples(&self, give_way_limit: Option<u32>) -> Vec<Triple<f64>> {
        let z = |axes: &[(usize, f64, f64)]| bounds_on(4, axes);
        let inf = f64::INFINITY;
        let target = |speed: f64| Action::SetTargetSpeed { speed, ramp_s: None };
        let until = |x: f64| Action::RepeatUntil {
            condition: Condition::Ge { field: "x".into(), value: x },
            body: vec![],
            timelimit: None,
        };
        let [a1, b1] = self.bend1;
        let [a2, b2] = self.bend2;
        let (begin, end) = (self.begin_chicane(), self.end_chicane());
        let (vb, vm) = (self.bend_speed, self.v_max);
        let exit = z(&[(X, end + 4.0, end + 60.0)]);
        let t = |mode: &str, i: u32, pre: Zone<f64>, orders: Vec<Action<f64>>, post: Zone<f64>| Triple {
            id: TripleId::new(mode, i),
            pre,
            orders: OrdersProgram::new(orders),
            post,
            is_start: false,
            is_end: false,
        };
        let mut start = t(
            "Sta",
            1,
            z(&[(X, -1.0, 1.0), (V, 0.0, 1.0)]),
            vec![
                Action::Wait { seconds: 0.0, jitter: Some(self.launch_jitter) },
                target(vm),
            ],
            z(&[(X, 20.0, 100.0)]),
        );
        start.is_start = true;
        let give_way = vec![
            Action::BrakeToHalt { field: None, below: None },
            Action::RepeatUntil {
                condition: Condition::Ge { field: "x_other".into(), value: end + 2.0 },
                body: vec![Action::Wait { seconds: self.wait_step, jitter: None }],
                timelimit: give_way_limit,
            },
            Action::SetTargetSpeed { speed: self.ramp_speed, ramp_s: Some(self.ramp_s) },
        ];
        let mut finish = t(
            "End",
            1,
            z(&[(X, self.finish - 5.0, inf)]),
            vec![Action::BrakeToHalt { field: None, below: None }],
            z(&[(X, self.finish - 5.0, inf)]),
        );
        finish.is_end = true;
        vec![
            start,
            t(
                "Str",
                1,
                z(&[(X, 15.0, self.brake1 - 10.0)]),
                vec![target(vm), until(self.brake1), target(vb)],
                z(&[(X, a1 - 100.0, a1 - 10.0), (V, 0.0, vb + 5.0)]),
            ),
            t(
                "Ben",
                1,
                z(&[(X, a1 - 105.0, a1 - 5.0), (V, -inf, vb + 7.0)]),
                vec![target(vb), until(b1 + 5.0), target(vm)],
                z(&[(X, b1 + 10.0, b1 + 100.0)]),
            ),
            t(
                "Str",
                2,
                z(&[(X, b1 + 5.0, b1 + 200.0)]),
                vec![target(vm)],
                z(&[(X, self.e1, self.e2)]),
            ),
            t(
                "Ch.rt",
                1,
                z(&[(X, self.d1, self.d2), (XO, end + 2.0, inf)]),
                vec![target(vm)],
                z(&[(X, end + 4.0, end + 60.0), (XO, end + 2.0, inf)]),
            ),
            t(
                "Ch.rt",
                2,
                z(&[(X, self.d1, self.d2), (XO, -inf, self.c1)]),
                vec![target(vm)],
                z(&[(X, end + 4.0, end + 60.0), (XO, -inf, begin - 2.0)]),
            ),
            t(
                "Ch.gw",
                1,
                z(&[(X, self.d1, self.d2), (XO, self.g1, self.g2)]),
                give_way,
                Zone::intersection(vec![
                    exit.clone(),
                    Zone::union(vec![z(&[(XO, -inf, begin - 2.0)]), z(&[(XO, end + 2.0, inf)])]),
                ]),
            ),
            t(
                "Str",
                3,
                z(&[(X, end, end + 70.0)]),
                vec![target(vm), until(self.brake2), target(vb)],
                z(&[(X, a2 - 100.0, a2 - 10.0), (V, 0.0, vb + 5.0)]),
            ),
            t(
                "Ben",
                2,
                z(&[(X, a2 - 105.0, a2 - 5.0), (V, -inf, vb + 7.0)]),
                vec![target(vb), until(b2 + 5.0), target(vm)],
                z(&[(X, b2 + 10.0, b2 + 100.0)]),
            ),
            t(
                "Str",
                4,
                z(&[(X, b2 + 5.0, b2 + 200.0)]),
                vec![target(vm)],
                z(&[(X, self.finish, self.finish + 100.0)]),
            ),
            finish,
        ]
    }

    /// The strategy of either car: every successor box is the
    /// predecessor's postcondition except at the chicane fork.
    pub fn strategy(&self) -> Strategy<f64> {
        let z = |axes: &[(usize, f64, f64)]| bounds_on(4, axes);
        let inf = f64::INFINITY;
        let [a1, b1] = self.bend1;
        let [a2, b2] = self.bend2;
        let end = self.end_chicane();
        let vb = self.bend_speed;
        let mut s = Strategy::default();
        let mut add = |from: (&str, u32), to: (&str, u32), zone: Zone<f64>| {
            s.add(
                TripleId::new(from.0, from.1),
                SelectionFunction { target: TripleId::new(to.0, to.1), zone },
            )
        };
        add(("Sta", 1), ("Str", 1), z(&[(X, 20.0, 100.0)]));
        add(("Str", 1), ("Ben", 1), z(&[(X, a1 - 100.0, a1 - 10.0), (V, 0.0, vb + 5.0)]));
        add(("Ben", 1), ("Str", 2), z(&[(X, b1 + 10.0, b1 + 100.0)]));
        add(("Str", 2), ("Ch.rt", 1), z(&[(X, self.h1, self.h2), (XO, self.k3, inf)]));
        add(("Str", 2), ("Ch.rt", 2), z(&[(X, self.h1, self.h2), (XO, -inf, self.k2)]));
        add(("Str", 2), ("Ch.gw", 1), z(&[(X, self.h1, self.h2), (XO, self.k1, self.k4)]));
        let exit = z(&[(X, end + 4.0, end + 60.0)]);
        add(("Ch.rt", 1), ("Str", 3), exit.clone());
        add(("Ch.rt", 2), ("Str", 3), exit.clone());
        add(("Ch.gw", 1), ("Str", 3), exit);
        add(("Str", 3), ("Ben", 2), z(&[(X, a2 - 100.0, a2 - 10.0), (V, 0.0, vb + 5.0)]));
        add(("Ben", 2), ("Str", 4), z(&[(X, b2 + 10.0, b2 + 100.0)]));
        add(("Str", 4), ("End", 1), z(&[(X, self.finish, self.finish + 100.0)]));
        s
    }

    /// Measured-data avoidance zones in mode-state coordinates.
    pub fn avoid_zones(&self) -> Vec<(String, Zone<f64>)> {
        let z = |axes: &[(usize, f64, f64)]| bounds_on(4, axes);
        let inf = f64::INFINITY;
        let [a1, b1] = self.bend1;
        let [a2, b2] = self.bend2;
        let [c0, c1] = self.chicane;
        vec![
            (
                "bend-overspeed".into(),
                Zone::union(vec![z(&[(X, a1, b1), (V, self.v_bend, inf)]), z(&[(X, a2, b2), (V, self.v_bend, inf)])]),
            ),
            ("chicane-co-occupancy".into(), z(&[(X, c0, c1), (XO, c0, c1)])),
        ]
    }

    /// Checks on the true state `(x1, v1, x2, v2)`.
    pub fn truth_checks(&self) -> Vec<TruthCheck> {
        let z = |axes: &[(usize, f64, f64)]| bounds_on(4, axes);
        let inf = f64::INFINITY;
        let [c0, c1] = self.chicane;
        let mut bends = Vec::new();
        for [a, b] in [self.bend1, self.bend2] {
            bends.push(z(&[(0, a, b), (1, self.v_bend, inf)]));
            bends.push(z(&[(2, a, b), (3, self.v_bend, inf)]));
        }
        vec![
            TruthCheck {
                name: "chicane-co-occupancy".into(),
                zone: z(&[(0, c0, c1), (2, c0, c1)]),
                terminal: true,
            },
            TruthCheck {
                name: "bend-overspeed".into(),
                zone: Zone::union(bends),
                terminal: false,
            },
        ]
    }

    pub fn sampler(&self) -> Sampler<f64> {
        let l = self.track_length;
        let grid = GridSpec::new(vec![1.0, 10.0, 5.0, 60.0], vec![0.0; 4], vec![l, self.v_max, l, self.v_max])
            .expect("static grid is valid");
        Sampler::uniform(grid)
    }

    /// Plant, start point and both cars.
    pub(crate) fn build(&self, seed: u64) -> (TruthPlant<f64>, ControlPoint<f64>, Vec<AgentSpec>) {
        let plant = self.plant();
        let start = ControlPoint::new(StatePoint::new(vec![0.0; 4]).expect("finite"), vec![0.0, 0.0]);
        let ctl = Arc::new(self.controller());
        let agents = [
            ("car1", CoordMap::Identity, 0, Some(self.timelimit), 0..1),
            ("car2", CoordMap::Permute { order: vec![2, 3, 0, 1] }, 2, None, 1..2),
        ]
        .into_iter()
        .map(|(name, map, axis, limit, params)| {
            let triples = self.triples(limit).into_iter().map(|t| (t.id.clone(), t)).collect();
            AgentSpec {
                name: name.into(),
                params,
                setup: RuntimeSetup {
                    agent: name.into(),
                    modes: self.modes(&map, axis),
                    triples,
                    strategy: self.strategy(),
                    transitions: TransitionRegistry::shared(),
                    controller: ctl.clone(),
                    avoid: self.avoid_zones(),
                    metric: MetricSpec::euclidean(4),
                    seed,
                },
            }
        })
        .collect();
        (plant, start, agents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent kinematics: integrate the launch profile with a small
    /// fixed step until `s` metres are covered.
    fn profile_time_numeric(p: &RacingParams, s: f64) -> f64 {
        let (mut t, mut x) = (0.0, 0.0);
        let dt = 1e-4;
        let a = (p.ramp_speed / 3.6) / p.ramp_s;
        while x < s {
            let v = (a * (t + dt / 2.0)).min(p.ramp_speed / 3.6);
            x += v * dt;
            t += dt;
        }
        t
    }

    #[test]
    fn defaults_validate() {
        let p = RacingParams::default();
        assert!(p.validate().unwrap().is_empty());
    }

    #[test]
    fn wait_bound_matches_numeric_kinematics() {
        let p = RacingParams::default();
        let b = p.chicane_wait_bound();
        let n = profile_time_numeric(&p, p.end_chicane() - (p.g1 - 1.0));
        assert!((b - n).abs() < 1e-3, "{b} vs {n}");
        assert!(b <= 30.0);
        assert!((b - 21.6).abs() < 0.05);
    }

    #[test]
    fn wait_bound_zero_length_chicane() {
        let mut p = RacingParams::default();
        p.chicane = [1600.0, 1600.0];
        p.g1 = 1601.0;
        assert!(p.chicane_wait_bound().abs() < 1e-12);
    }

    #[test]
    fn short_timelimit_warns() {
        let p = RacingParams { timelimit: 10, ..Default::default() };
        let w = p.validate().unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("wait bound"));
    }

    #[test]
    fn catch_check_defaults_and_variants() {
        let p = RacingParams::default();
        let (t1, t2) = p.catch_times(p.v_max);
        assert!((t1 - profile_time_numeric(&p, p.end_chicane() + 2.0 - (p.d2 - 2.0))).abs() < 1e-3);
        let t2_oracle = (p.begin_chicane() - 2.0 - (p.c1 + 2.0)) / (120.0 / 3.6);
        assert!((t2 - t2_oracle).abs() < 1e-9);
        assert!(p.catch_check());
        let near = RacingParams { c1: 1590.0, ..Default::default() };
        assert!(!near.catch_check());
        assert!(near.catch_check_with(0.0));
    }

    #[test]
    fn ordering_violation_names_chain() {
        let p = RacingParams { k3: 1180.0, ..Default::default() };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("give-way band"), "{err}");
        assert!(err.contains("k3"), "{err}");
    }

    #[test]
    fn braking_rule_enforced() {
        let p = RacingParams { d2: 1560.0, ..Default::default() };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("braking rule"), "{err}");
    }

    #[test]
    fn eleven_triples_one_start_one_end() {
        let p = RacingParams::default();
        let ts = p.triples(Some(30));
        assert_eq!(ts.len(), 11);
        assert_eq!(ts.iter().filter(|t| t.is_start).count(), 1);
        assert_eq!(ts.iter().filter(|t| t.is_end).count(), 1);
        let s = p.strategy();
        for (from, succ) in &s.choices {
            assert!(ts.iter().any(|t| &t.id == from));
            for phi in succ {
                assert!(ts.iter().any(|t| t.id == phi.target));
            }
        }
        assert_eq!(s.successors(&TripleId::new("Str", 2)).len(), 3);
    }

    #[test]
    fn controller_respects_limits() {
        let p = RacingParams::default();
        let c = p.controller();
        let x = [0.0, 10.0, 0.0, 0.0];
        assert_eq!(c(&x, &Command::TargetSpeed { speed: 120.0, rate: None }), vec![20.0]);
        assert_eq!(c(&x, &Command::TargetSpeed { speed: 120.0, rate: Some(5.0) }), vec![5.0]);
        assert_eq!(c(&[0.0, 100.0, 0.0, 0.0], &Command::TargetSpeed { speed: 65.0, rate: None }), vec![-36.0]);
        assert_eq!(c(&x, &Command::Brake), vec![-36.0]);
        assert_eq!(c(&x, &Command::Idle), vec![0.0]);
    }
}
