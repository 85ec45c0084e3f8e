//! Ground-truth physical behaviour: drift field, control fibration
//! `C ⊂ X × P` with projection `π`, bounded disturbance, and the restart
//! semantics `f|_s` realised by [`evolve`].

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::integrate::{rk4_step, saturate, substeps};
use crate::metric::{GeometryError, StatePoint};
use crate::scalar::Scalar;
use crate::seeding::{rng_for, unit_ball};
use crate::zone::Zone;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("left the chart at t={time}: state {state:?}")]
    LeftChart { time: f64, state: Vec<f64> },
    #[error("inadmissible control: {reason}")]
    Inadmissible { reason: String },
    #[error("invalid time interval [{start}, {end}]")]
    BadInterval { start: f64, end: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

type FieldFn<T> = dyn Fn(&[T], T) -> Vec<T> + Send + Sync;
type AdmissibleFn<T> = dyn Fn(&[T], &[T]) -> bool + Send + Sync;
type ControlFieldFn<T> = dyn Fn(&[T], &[T], T) -> Vec<T> + Send + Sync;

/// Background dynamics `v(x, t)`.
#[derive(Clone)]
pub struct VectorField<T> {
    dim: usize,
    eval: Arc<FieldFn<T>>,
    lipschitz_hint: Option<T>,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(dim: usize, f: impl Fn(&[T], T) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(f),
            lipschitz_hint: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, move |_, _| vec![T::zero(); dim])
    }

    pub fn with_lipschitz(mut self, l: T) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    pub fn lipschitz_hint(&self) -> Option<T> {
        self.lipschitz_hint
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[T], t: T) -> Vec<T> {
        (self.eval)(x, t)
    }
}

impl<T> fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.dim).finish_non_exhaustive()
    }
}

/// A point `c ∈ C`: the state it is attached to and the control parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlPoint<T> {
    base: StatePoint<T>,
    params: Vec<T>,
}

impl<T: Scalar> ControlPoint<T> {
    pub fn new(base: StatePoint<T>, params: Vec<T>) -> Self {
        Self { base, params }
    }

    /// The projection `π(c)`.
    pub fn pi(&self) -> &StatePoint<T> {
        &self.base
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Same parameters attached to another state.
    pub fn rebased(&self, base: StatePoint<T>) -> Self {
        Self {
            base,
            params: self.params.clone(),
        }
    }
}

/// Which control parameters exist at which states, and how they push the
/// state: `ẋ = v(x,t) + c(x,p,t)`.
#[derive(Clone)]
pub struct ControlFibration<T> {
    param_dim: usize,
    admissible: Arc<AdmissibleFn<T>>,
    control_field: Arc<ControlFieldFn<T>>,
    rule: String,
}

impl<T: Scalar> ControlFibration<T> {
    pub fn new(
        param_dim: usize,
        rule: impl Into<String>,
        admissible: impl Fn(&[T], &[T]) -> bool + Send + Sync + 'static,
        control_field: impl Fn(&[T], &[T], T) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            param_dim,
            admissible: Arc::new(admissible),
            control_field: Arc::new(control_field),
            rule: rule.into(),
        }
    }

    /// No control parameters at all (`P` a point).
    pub fn uncontrolled(dim: usize) -> Self {
        Self::new(0, "no control", |_, p: &[T]| p.is_empty(), move |_, _, _| vec![T::zero(); dim])
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    /// Human-readable admissibility rule, quoted in rejections.
    pub fn rule(&self) -> &str {
        &self.rule
    }

    pub fn is_admissible(&self, x: &[T], p: &[T]) -> bool {
        p.len() == self.param_dim && (self.admissible)(x, p)
    }

    pub fn control_field(&self, x: &[T], p: &[T], t: T) -> Vec<T> {
        (self.control_field)(x, p, t)
    }
}

impl<T> fmt::Debug for ControlFibration<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlFibration")
            .field("param_dim", &self.param_dim)
            .field("rule", &self.rule)
            .finish_non_exhaustive()
    }
}

/// `(x, p) ∈ C`?
pub fn check_admissible<T: Scalar>(fib: &ControlFibration<T>, x: &StatePoint<T>, p: &[T]) -> bool {
    x.is_finite() && fib.is_admissible(x.coords(), p)
}

/// Per-step uniform perturbation inside an axis-scaled unit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disturbance<T> {
    pub amplitude: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct TruthPlant<T> {
    pub drift: VectorField<T>,
    pub fibration: ControlFibration<T>,
    pub disturbance: Option<Disturbance<T>>,
    /// Domain of validity; leaving it aborts the evolution.
    pub chart: Zone<T>,
    /// Physical saturation bounds applied after every fine step.
    pub saturation: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> TruthPlant<T> {
    pub fn new(drift: VectorField<T>, fibration: ControlFibration<T>, chart: Zone<T>) -> Self {
        Self {
            drift,
            fibration,
            disturbance: None,
            chart,
            saturation: None,
        }
    }

    pub fn with_disturbance(mut self, amplitude: Vec<T>) -> Self {
        self.disturbance = Some(Disturbance { amplitude });
        self
    }

    pub fn with_saturation(mut self, lo: Vec<T>, hi: Vec<T>) -> Self {
        self.saturation = Some((lo, hi));
        self
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn velocity(&self, x: &[T], p: &[T], t: T) -> Vec<T> {
        let mut v = self.drift.eval(x, t);
        if self.fibration.param_dim() > 0 {
            for (vi, ci) in v.iter_mut().zip(self.fibration.control_field(x, p, t)) {
                *vi += ci;
            }
        }
        v
    }

    /// One fine step under zero-order-hold control `p`, followed by
    /// saturation, the disturbance draw, and the chart check.
    pub(crate) fn fine_step<R: Rng + ?Sized>(
        &self,
        x: &[T],
        p: &[T],
        t: T,
        h: T,
        rng: &mut R,
    ) -> Result<Vec<T>, PlantError> {
        let f = |y: &[T], s: T| self.velocity(y, p, s);
        let mut next = rk4_step(&f, x, t, h);
        saturate(&mut next, self.saturation.as_ref());
        if let Some(d) = &self.disturbance {
            let active: Vec<usize> = (0..d.amplitude.len())
                .filter(|i| d.amplitude[*i] != T::zero())
                .collect();
            let u = unit_ball(rng, active.len());
            for (k, i) in active.iter().enumerate() {
                next[*i] += d.amplitude[*i] * T::of(u[k]);
            }
            saturate(&mut next, self.saturation.as_ref());
        }
        self.check_chart(&next, t + h)?;
        Ok(next)
    }

    pub(crate) fn check_chart(&self, x: &[T], t: T) -> Result<(), PlantError> {
        let finite = x.iter().all(|v| v.is_finite());
        if !finite || !self.chart.member(x)? {
            return Err(PlantError::LeftChart {
                time: t.as_f64(),
                state: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        Ok(())
    }
}

/// Ground-truth samples on a uniform fine grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub start_time: T,
    pub dt: T,
    pub states: Vec<StatePoint<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn end_time(&self) -> T {
        self.time_of(self.states.len().saturating_sub(1))
    }

    pub fn time_of(&self, k: usize) -> T {
        self.start_time + self.dt * T::of(k as f64)
    }

    pub fn last(&self) -> &StatePoint<T> {
        self.states.last().expect("trajectory has at least its start")
    }

    /// State at `t`: the sample itself on the grid, linear interpolation in
    /// between.
    pub fn at(&self, t: T) -> Option<StatePoint<T>> {
        let pos = ((t - self.start_time) / self.dt).as_f64();
        let n = self.states.len() - 1;
        if pos < -1e-9 || pos > n as f64 + 1e-9 {
            return None;
        }
        let r = pos.round();
        if (pos - r).abs() < 1e-9 {
            return Some(self.states[r as usize].clone());
        }
        let k = pos.floor() as usize;
        let frac = T::of(pos - k as f64);
        let (a, b) = (self.states[k].coords(), self.states[k + 1].coords());
        Some(StatePoint::from_vec_unchecked(
            a.iter().zip(b).map(|(x, y)| *x + frac * (*y - *x)).collect(),
        ))
    }
}

/// Integrates the truth from `π(c0)` at time `s` to `t1` with fine step
/// `fine_dt`, holding `c0`'s parameters constant. Deterministic in `seed`.
pub fn evolve<T: Scalar>(
    plant: &TruthPlant<T>,
    c0: &ControlPoint<T>,
    s: T,
    t1: T,
    fine_dt: T,
    seed: u64,
) -> Result<Trajectory<T>, PlantError> {
    if !(t1 >= s) || !(fine_dt > T::zero()) {
        return Err(PlantError::BadInterval {
            start: s.as_f64(),
            end: t1.as_f64(),
        });
    }
    if !check_admissible(&plant.fibration, c0.pi(), c0.params()) {
        return Err(PlantError::Inadmissible {
            reason: plant.fibration.rule().to_string(),
        });
    }
    plant.check_chart(c0.pi().coords(), s)?;
    let mut rng = rng_for(seed, "plant", 0);
    let span = t1 - s;
    let mut states = vec![c0.pi().clone()];
    if span > T::zero() {
        let n = substeps(span, fine_dt);
        let mut x = c0.pi().coords().to_vec();
        for k in 0..n {
            let t = s + fine_dt * T::of(k as f64);
            let h = if k + 1 == n { (t1 - t).min(fine_dt) } else { fine_dt };
            // the last step absorbs representation noise only
            let h = if (h - fine_dt).abs() < fine_dt * T::of(1e-9) { fine_dt } else { h };
            x = plant.fine_step(&x, c0.params(), t, h, &mut rng)?;
            states.push(StatePoint::from_vec_unchecked(x.clone()));
        }
    }
    Ok(Trajectory {
        start_time: s,
        dt: fine_dt,
        states,
    })
}
