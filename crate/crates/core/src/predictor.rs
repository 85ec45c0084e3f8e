//! The computed behaviour `y`: one-step path calculation, the
//! measure/control/predict procedures, tube assembly and the empirical
//! (λ,ε,η)-property checker.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::integrate::{rk4_step, saturate, substeps};
use crate::metric::{check_dim, GeometryError, MetricSpec, StatePoint};
use crate::oracle::{Measurement, OracleError, PhysicalOracle};
use crate::plant::{evolve, ControlFibration, ControlPoint, PlantError, TruthPlant, VectorField};
use crate::scalar::Scalar;
use crate::seeding::{derive_seed, rng_for, unit_ball};
use crate::tube::{DisjointPath, PathSegment, Tube};
use crate::zone::Zone;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("model left the chart at t={time}: state {state:?}")]
    LeftChart { time: f64, state: Vec<f64> },
    #[error("step {step}: control inadmissible ({rule})")]
    Inadmissible { step: usize, rule: String },
    #[error("step {step}: {source}")]
    Oracle {
        step: usize,
        #[source]
        source: OracleError,
    },
    #[error("truth integration: {0}")]
    Plant(#[from] PlantError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The mathematical model `x` the algorithm predicts with.
#[derive(Debug, Clone)]
pub struct ModelSpec<T> {
    pub drift: VectorField<T>,
    pub fibration: Option<ControlFibration<T>>,
    pub integrator_step: T,
    pub chart: Option<Zone<T>>,
    pub saturation: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn new(drift: VectorField<T>, integrator_step: T) -> Self {
        Self {
            drift,
            fibration: None,
            integrator_step,
            chart: None,
            saturation: None,
        }
    }

    pub fn with_fibration(mut self, f: ControlFibration<T>) -> Self {
        self.fibration = Some(f);
        self
    }

    pub fn with_chart(mut self, chart: Zone<T>) -> Self {
        self.chart = Some(chart);
        self
    }

    pub fn with_saturation(mut self, lo: Vec<T>, hi: Vec<T>) -> Self {
        self.saturation = Some((lo, hi));
        self
    }

    /// Same dynamics as the truth, minus disturbance.
    pub fn exact(plant: &TruthPlant<T>, integrator_step: T) -> Self {
        Self {
            drift: plant.drift.clone(),
            fibration: Some(plant.fibration.clone()),
            integrator_step,
            chart: Some(plant.chart.clone()),
            saturation: plant.saturation.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn validate(&self, lambda: T) -> Result<(), PredictError> {
        if !(self.integrator_step > T::zero()) || self.integrator_step > lambda * T::of(1.0 + 1e-12) {
            return Err(PredictError::Config(format!(
                "integrator step {} must lie in (0, lambda = {lambda}]",
                self.integrator_step
            )));
        }
        Ok(())
    }

    fn velocity(&self, x: &[T], p: &[T], t: T) -> Vec<T> {
        let mut v = self.drift.eval(x, t);
        if let Some(f) = &self.fibration {
            if f.param_dim() > 0 {
                for (vi, ci) in v.iter_mut().zip(f.control_field(x, p, t)) {
                    *vi += ci;
                }
            }
        }
        v
    }

    fn admissible(&self, x: &[T], p: &[T]) -> Result<(), String> {
        match &self.fibration {
            Some(f) if !f.is_admissible(x, p) => Err(f.rule().to_string()),
            None if !p.is_empty() => Err("no control parameters".to_string()),
            _ => Ok(()),
        }
    }
}

/// `y_{n+1}` on `[nλ, (n+1)λ]` from `a` with the parameters of `b`.
pub fn calculate_path<T: Scalar>(
    model: &ModelSpec<T>,
    a: &StatePoint<T>,
    b: &ControlPoint<T>,
    n: usize,
    lambda: T,
) -> Result<PathSegment<T>, PredictError> {
    model.validate(lambda)?;
    check_dim("initial state", model.dim(), a.dim())?;
    let b = b.rebased(a.clone());
    model
        .admissible(a.coords(), b.params())
        .map_err(|rule| PredictError::Inadmissible { step: n, rule })?;
    let per = substeps(lambda, model.integrator_step);
    let h = lambda / T::of(per as f64);
    let t0 = lambda * T::of(n as f64);
    let p = b.params().to_vec();
    let f = |x: &[T], t: T| model.velocity(x, &p, t);
    let mut samples = Vec::with_capacity(per + 1);
    samples.push(a.clone());
    let mut x = a.coords().to_vec();
    for k in 0..per {
        let t = t0 + h * T::of(k as f64);
        x = rk4_step(&f, &x, t, h);
        saturate(&mut x, model.saturation.as_ref());
        let outside = match &model.chart {
            Some(c) => !c.member(&x)?,
            None => false,
        };
        if outside || x.iter().any(|v| !v.is_finite()) {
            return Err(PredictError::LeftChart {
                time: (t + h).as_f64(),
                state: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        samples.push(StatePoint::new(x.clone())?);
    }
    Ok(PathSegment {
        start_index: n,
        start_time: t0,
        step: h,
        initial: a.clone(),
        control: b,
        samples,
    })
}

fn oracle_err(step: usize) -> impl Fn(OracleError) -> PredictError {
    move |source| match source {
        OracleError::Rejected { rule, .. } => PredictError::Inadmissible { step, rule },
        source => PredictError::Oracle { step, source },
    }
}

/// Measure, predict with a fixed control, let the plant run; `n_max` times.
pub fn measure_predict<T: Scalar, O: PhysicalOracle<T> + ?Sized>(
    n_max: usize,
    oracle: &mut O,
    model: &ModelSpec<T>,
    control_fixed: &ControlPoint<T>,
) -> Result<DisjointPath<T>, PredictError> {
    let run = measure_control_predict(n_max, oracle, model, |m: &Measurement<T>| {
        control_fixed.rebased(m.value.clone())
    })?;
    Ok(run.path)
}

/// Path plus the two finite streams of a measure/control/predict run.
#[derive(Debug, Clone, Serialize)]
pub struct ControlledRun<T> {
    pub path: DisjointPath<T>,
    pub measurements: Vec<Measurement<T>>,
    pub controls: Vec<ControlPoint<T>>,
}

/// Per step: measure, choose `b` with `π(b) = m(nλ)`, actuate, predict.
/// A chooser answer based elsewhere is rebased onto the measurement.
pub fn measure_control_predict<T, O, F>(
    n_max: usize,
    oracle: &mut O,
    model: &ModelSpec<T>,
    mut chooser: F,
) -> Result<ControlledRun<T>, PredictError>
where
    T: Scalar,
    O: PhysicalOracle<T> + ?Sized,
    F: FnMut(&Measurement<T>) -> ControlPoint<T>,
{
    let mut algo = Untimed(&mut chooser);
    let (run, _) = run_loop(n_max, oracle, model, &mut algo, None)?;
    Ok(run)
}

/// What a timed chooser returns: the control and its simulated cost.
#[derive(Debug, Clone)]
pub struct Choice<T> {
    pub control: ControlPoint<T>,
    pub simulated_cost: Duration,
}

pub trait TimedChooser<T> {
    fn choose(&mut self, m: &Measurement<T>) -> Choice<T>;
}

/// Adapts a plain chooser; its simulated cost is zero.
pub struct Untimed<F>(pub F);

impl<T: Scalar, F: FnMut(&Measurement<T>) -> ControlPoint<T>> TimedChooser<T> for Untimed<F> {
    fn choose(&mut self, m: &Measurement<T>) -> Choice<T> {
        Choice {
            control: (self.0)(m),
            simulated_cost: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingMode {
    /// Trust the cost each choice reports.
    Simulated,
    /// Measure the chooser with the wall clock.
    WallClock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTiming {
    pub step: usize,
    pub cost: Duration,
    pub over_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub mode: TimingMode,
    pub budget: Duration,
    pub steps: Vec<StepTiming>,
}

impl TimingReport {
    pub fn overruns(&self) -> usize {
        self.steps.iter().filter(|s| s.over_budget).count()
    }
}

/// As [`measure_control_predict`], timing each choice against `budget`.
/// Overruns are flagged; the run carries on.
pub fn measure_control_algorithm_predict<T, O, A>(
    n_max: usize,
    oracle: &mut O,
    model: &ModelSpec<T>,
    algorithm: &mut A,
    budget: Duration,
    mode: TimingMode,
) -> Result<(ControlledRun<T>, TimingReport), PredictError>
where
    T: Scalar,
    O: PhysicalOracle<T> + ?Sized,
    A: TimedChooser<T>,
{
    let lambda = Duration::from_secs_f64(oracle.lambda().as_f64());
    if budget > lambda {
        return Err(PredictError::Config(format!(
            "budget {budget:?} exceeds the time step {lambda:?}"
        )));
    }
    let (run, steps) = run_loop(n_max, oracle, model, algorithm, Some((budget, mode)))?;
    Ok((run, TimingReport { mode, budget, steps }))
}

fn run_loop<T, O, A>(
    n_max: usize,
    oracle: &mut O,
    model: &ModelSpec<T>,
    algorithm: &mut A,
    timing: Option<(Duration, TimingMode)>,
) -> Result<(ControlledRun<T>, Vec<StepTiming>), PredictError>
where
    T: Scalar,
    O: PhysicalOracle<T> + ?Sized,
    A: TimedChooser<T>,
{
    if n_max == 0 {
        return Err(PredictError::Config("n_max must be at least 1".into()));
    }
    let lambda = oracle.lambda();
    model.validate(lambda)?;
    let mut segments = Vec::with_capacity(n_max);
    let mut measurements = Vec::with_capacity(n_max);
    let mut controls = Vec::with_capacity(n_max);
    let mut steps = Vec::new();
    for _ in 0..n_max {
        let n = oracle.step_index();
        let m = oracle.measure().map_err(oracle_err(n))?;
        let started = Instant::now();
        let choice = algorithm.choose(&m);
        let wall = started.elapsed();
        if let Some((budget, mode)) = timing {
            let cost = match mode {
                TimingMode::Simulated => choice.simulated_cost,
                TimingMode::WallClock => wall,
            };
            steps.push(StepTiming {
                step: n,
                cost,
                over_budget: cost > budget,
            });
        }
        let b = choice.control.rebased(m.value.clone());
        oracle.actuate(&b).map_err(oracle_err(n))?;
        segments.push(calculate_path(model, &m.value, &b, n, lambda)?);
        measurements.push(m);
        controls.push(b);
        oracle.advance().map_err(oracle_err(n))?;
    }
    Ok((
        ControlledRun {
            path: DisjointPath::new(lambda, segments)?,
            measurements,
            controls,
        },
        steps,
    ))
}

/// Wraps a path in its η-tube.
pub fn build_tube<T: Scalar>(path: DisjointPath<T>, eta: T) -> Result<Tube<T>, PredictError> {
    Ok(Tube::new(path, eta)?)
}

/// `ε·e^{Lλ}`: the Gronwall bound on one-step divergence of two exact
/// solutions of an `L`-Lipschitz field started `ε` apart.
pub fn gronwall_bound<T: Scalar>(epsilon: T, lipschitz: T, lambda: T) -> T {
    epsilon * (lipschitz * lambda).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeeReport<T> {
    pub lambda: T,
    pub epsilon: T,
    pub eta: T,
    pub eta_observed: T,
    pub samples_used: usize,
    pub verdict: bool,
    pub label: &'static str,
}

/// Inputs of [`check_lee_property`] beyond the model and truth.
#[derive(Debug, Clone)]
pub struct LeeQuery<'a, T> {
    pub control: &'a ControlPoint<T>,
    pub lambda: T,
    pub epsilon: T,
    pub eta: T,
    pub region: &'a Zone<T>,
    pub metric: &'a MetricSpec<T>,
    pub n_samples: usize,
    pub seed: u64,
}

const ANCHOR_TRIES: usize = 100_000;

fn sample_anchor<T: Scalar>(
    region: &Zone<T>,
    dim: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<T>, PredictError> {
    use rand::Rng;
    let (lo, hi) = region.bounds(dim);
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) || lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Err(PredictError::Config("lee region must be bounded and nonempty".into()));
    }
    for _ in 0..ANCHOR_TRIES {
        let a: Vec<T> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| *l + (*h - *l) * T::of(rng.random::<f64>()))
            .collect();
        if region.member(&a)? {
            return Ok(a);
        }
    }
    Err(PredictError::Config("could not sample an anchor inside the lee region".into()))
}

/// Monte-Carlo estimate of the worst one-step divergence between truth
/// and model for starts within `ε` of anchors in `region`.
///
/// Sample `j` uses its own RNG stream, so the sample set for `n` is a
/// prefix of the one for `2n`.
pub fn check_lee_property<T: Scalar>(
    model: &ModelSpec<T>,
    truth: &TruthPlant<T>,
    q: &LeeQuery<'_, T>,
) -> Result<LeeReport<T>, PredictError> {
    if q.n_samples == 0 {
        return Err(PredictError::Config("n_samples must be at least 1".into()));
    }
    if !(q.eta > T::zero()) {
        return Err(PredictError::Config(format!("eta {} must be positive", q.eta)));
    }
    let dim = model.dim();
    check_dim("metric", dim, q.metric.dim())?;
    let per = substeps(q.lambda, model.integrator_step);
    let fine_dt = q.lambda / T::of((per * 10) as f64);
    let mut worst = T::zero();
    for j in 0..q.n_samples {
        let mut rng = rng_for(q.seed, "lee", j as u64);
        let a = StatePoint::new(sample_anchor(q.region, dim, &mut rng)?)?;
        let u = unit_ball(&mut rng, dim);
        let start: Vec<T> = a
            .coords()
            .iter()
            .zip(q.metric.weights())
            .zip(&u)
            .map(|((x, w), ui)| *x + q.epsilon * T::of(*ui) / w.sqrt())
            .collect();
        let seg = calculate_path(model, &a, q.control, 0, q.lambda)?;
        let c = q.control.rebased(StatePoint::new(start)?);
        let tr = evolve(truth, &c, T::zero(), q.lambda, fine_dt, derive_seed(q.seed, "lee-truth", j as u64))?;
        for (k, y) in seg.samples.iter().enumerate() {
            let f = &tr.states[k * 10];
            let d = q.metric.dist(f.coords(), y.coords())?;
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(LeeReport {
        lambda: q.lambda,
        epsilon: q.epsilon,
        eta: q.eta,
        eta_observed: worst,
        samples_used: q.n_samples,
        verdict: worst < q.eta,
        label: "empirical (sampled), not a proof",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{OracleConfig, OracleSession};
    use crate::trace::TraceHeader;

    fn pt(v: &[f64]) -> StatePoint<f64> {
        StatePoint::new(v.to_vec()).unwrap()
    }

    fn free(dim: usize) -> ControlPoint<f64> {
        ControlPoint::new(StatePoint::zeros(dim), vec![])
    }

    fn plant(f: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> TruthPlant<f64> {
        TruthPlant::new(
            VectorField::new(1, f),
            ControlFibration::uncontrolled(1),
            Zone::interval(-1e6, 1e6),
        )
    }

    fn session(p: &TruthPlant<f64>, x0: f64, eps: f64, lambda: f64, seed: u64) -> OracleSession<f64> {
        OracleSession::new(
            OracleConfig::new(eps, lambda, seed).unwrap(),
            MetricSpec::euclidean(1),
            p.clone(),
            ControlPoint::new(pt(&[x0]), vec![]),
            TraceHeader::new("unit", seed, vec!["x".into()]),
        )
        .unwrap()
    }

    #[test]
    fn constant_segment_for_static_model() {
        let m = ModelSpec::new(VectorField::zero(2), 0.01);
        let seg = calculate_path(&m, &pt(&[1.0, 2.0]), &free(2), 4, 0.1).unwrap();
        assert!(seg.samples.iter().all(|s| s.coords() == [1.0, 2.0]));
        assert!((seg.start_time - 0.4).abs() < 1e-12);
        assert_eq!(seg.samples.len(), 11);
    }

    #[test]
    fn exponential_one_step() {
        let m = ModelSpec::new(VectorField::new(1, |x: &[f64], _| vec![x[0]]), 0.01);
        let seg = calculate_path(&m, &pt(&[1.0]), &free(1), 0, 0.1).unwrap();
        assert!((seg.samples.last().unwrap()[0] - 0.1f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn first_sample_is_initial_bitwise() {
        let m = ModelSpec::new(VectorField::new(1, |x: &[f64], _| vec![x[0].sin()]), 0.03);
        let a = pt(&[0.1 + 0.2]);
        let seg = calculate_path(&m, &a, &free(1), 7, 0.1).unwrap();
        assert_eq!(seg.samples[0].coords()[0].to_bits(), a.coords()[0].to_bits());
        assert_eq!(seg.initial, a);
    }

    #[test]
    fn model_chart_exit_reports_time() {
        let m = ModelSpec::new(VectorField::new(1, |_: &[f64], _| vec![10.0]), 0.01).with_chart(Zone::interval(0.0, 1.0));
        match calculate_path(&m, &pt(&[0.5]), &free(1), 0, 0.1) {
            Err(PredictError::LeftChart { time, .. }) => assert!((time - 0.06).abs() < 1e-9, "{time}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integrator_step_above_lambda_rejected() {
        let m = ModelSpec::new(VectorField::zero(1), 0.2);
        assert!(matches!(calculate_path(&m, &pt(&[0.0]), &free(1), 0, 0.1), Err(PredictError::Config(_))));
    }

    #[test]
    fn static_plant_segments_sit_on_measurements() {
        let p = plant(|_, _| vec![0.0]);
        let mut s = session(&p, 3.0, 0.1, 0.1, 1);
        let m = ModelSpec::exact(&p, 0.01);
        let path = measure_predict(5, &mut s.port("a"), &m, &free(1)).unwrap();
        assert_eq!(path.segments().len(), 5);
        for seg in path.segments() {
            assert!(seg.samples.iter().all(|y| y == &seg.initial));
            assert!((seg.initial[0] - 3.0).abs() < 0.1);
        }
    }

    #[test]
    fn three_steps_cover_three_lambda() {
        let p = plant(|_, _| vec![1.0]);
        let mut s = session(&p, 0.0, 0.1, 0.5, 2);
        let path = measure_predict(3, &mut s.port("a"), &ModelSpec::exact(&p, 0.05), &free(1)).unwrap();
        assert_eq!(path.segments().len(), 3);
        assert_eq!(path.start_time(), 0.0);
        assert!((path.end_time() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn linear_plant_stays_within_gronwall() {
        let p = plant(|x, _| vec![x[0]]);
        let (eps, lambda) = (0.05, 0.1);
        let mut s = session(&p, 1.0, eps, lambda, 9);
        let path = measure_predict(10, &mut s.port("a"), &ModelSpec::exact(&p, 0.01), &free(1)).unwrap();
        let bound = gronwall_bound(eps, 1.0, lambda) + 1e-8;
        for (t, x) in s.truth_history() {
            let y = path.eval(*t).unwrap();
            assert!((x[0] - y[0]).abs() < bound, "t={t}");
        }
    }

    #[test]
    fn streams_match_and_project() {
        let p = plant(|_, _| vec![0.5]);
        let mut s = session(&p, 0.0, 0.2, 1.0, 4);
        let run = measure_control_predict(6, &mut s.port("a"), &ModelSpec::exact(&p, 0.1), |m: &Measurement<f64>| {
            ControlPoint::new(pt(&[999.0]), vec![]).rebased(m.value.clone())
        })
        .unwrap();
        assert_eq!(run.measurements.len(), 6);
        assert_eq!(run.controls.len(), 6);
        for (m, b) in run.measurements.iter().zip(&run.controls) {
            assert_eq!(b.pi(), &m.value);
        }
    }

    #[test]
    fn inadmissible_choice_aborts_with_step() {
        let fib = ControlFibration::new(1, "p >= 0", |_, p: &[f64]| p[0] >= 0.0, |_, p: &[f64], _| vec![p[0]]);
        let p = TruthPlant::new(VectorField::zero(1), fib, Zone::interval(-1e3, 1e3));
        let mut s = OracleSession::new(
            OracleConfig::new(0.1, 1.0, 0).unwrap(),
            MetricSpec::euclidean(1),
            p.clone(),
            ControlPoint::new(pt(&[0.0]), vec![0.0]),
            TraceHeader::new("unit", 0, vec!["x".into()]),
        )
        .unwrap();
        let mut calls = 0;
        let err = measure_control_predict(5, &mut s.port("a"), &ModelSpec::exact(&p, 0.1), |m: &Measurement<f64>| {
            calls += 1;
            ControlPoint::new(m.value.clone(), vec![if calls == 3 { -1.0 } else { 1.0 }])
        })
        .unwrap_err();
        assert!(matches!(err, PredictError::Inadmissible { step: 2, .. }), "{err:?}");
    }

    struct Slow(Duration);

    impl TimedChooser<f64> for Slow {
        fn choose(&mut self, m: &Measurement<f64>) -> Choice<f64> {
            Choice {
                control: ControlPoint::new(m.value.clone(), vec![]),
                simulated_cost: self.0,
            }
        }
    }

    #[test]
    fn overruns_flagged_not_fatal() {
        let p = plant(|_, _| vec![0.0]);
        let m = ModelSpec::exact(&p, 0.01);
        let budget = Duration::from_millis(50);
        let mut s = session(&p, 0.0, 0.1, 0.1, 0);
        let (run, rep) = measure_control_algorithm_predict(4, &mut s.port("a"), &m, &mut Slow(Duration::ZERO), budget, TimingMode::Simulated).unwrap();
        assert_eq!(rep.steps.len(), 4);
        assert_eq!(rep.overruns(), 0);
        assert_eq!(run.path.segments().len(), 4);
        let mut s = session(&p, 0.0, 0.1, 0.1, 0);
        let (_, rep) = measure_control_algorithm_predict(4, &mut s.port("a"), &m, &mut Slow(Duration::from_millis(80)), budget, TimingMode::Simulated).unwrap();
        assert_eq!(rep.overruns(), 4);
        let mut s = session(&p, 0.0, 0.1, 0.1, 0);
        let mut sleepy = Untimed(|m: &Measurement<f64>| {
            std::thread::sleep(Duration::from_millis(5));
            ControlPoint::new(m.value.clone(), vec![])
        });
        let (_, rep) = measure_control_algorithm_predict(2, &mut s.port("a"), &m, &mut sleepy, Duration::from_millis(1), TimingMode::WallClock).unwrap();
        assert_eq!(rep.overruns(), 2);
        let mut s = session(&p, 0.0, 0.1, 0.1, 0);
        assert!(measure_control_algorithm_predict(2, &mut s.port("a"), &m, &mut Slow(Duration::ZERO), Duration::from_secs(1), TimingMode::Simulated).is_err());
    }

    fn lee(model: &ModelSpec<f64>, truth: &TruthPlant<f64>, lambda: f64, eps: f64, eta: f64, n: usize) -> LeeReport<f64> {
        let region = Zone::interval(-1.0, 1.0);
        let metric = MetricSpec::euclidean(1);
        let control = free(1);
        check_lee_property(
            model,
            truth,
            &LeeQuery {
                control: &control,
                lambda,
                epsilon: eps,
                eta,
                region: &region,
                metric: &metric,
                n_samples: n,
                seed: 17,
            },
        )
        .unwrap()
    }

    #[test]
    fn lee_static_plant() {
        let p = plant(|_, _| vec![0.0]);
        let r = lee(&ModelSpec::exact(&p, 0.01), &p, 0.1, 0.1, 0.1 + 1e-3, 200);
        assert!(r.eta_observed <= 0.1 && r.eta_observed > 0.09);
        assert!(r.verdict);
        assert_eq!(r.label, "empirical (sampled), not a proof");
    }

    #[test]
    fn lee_wrong_model_fails() {
        let truth = TruthPlant::new(VectorField::new(1, |_: &[f64], _| vec![1.0]), ControlFibration::uncontrolled(1), Zone::interval(-1e3, 1e3));
        let model = ModelSpec::new(VectorField::zero(1), 0.1);
        let r = lee(&model, &truth, 1.0, 1e-12, 0.5, 20);
        assert!((r.eta_observed - 1.0).abs() < 1e-6);
        assert!(!r.verdict);
    }

    #[test]
    fn lee_monotone_in_samples() {
        let p = plant(|x, _| vec![x[0]]);
        let m = ModelSpec::exact(&p, 0.01);
        let mut prev = 0.0;
        for n in [10, 20, 40, 80] {
            let r = lee(&m, &p, 0.1, 0.1, 1.0, n);
            assert!(r.eta_observed >= prev);
            prev = r.eta_observed;
        }
    }

    #[test]
    fn zero_eta_tube_rejected() {
        let path = DisjointPath::from_fn(1.0, 1, 0.1, |_| vec![0.0]).unwrap();
        assert!(build_tube(path.clone(), 0.0).is_err());
        assert_eq!(build_tube(path, 1.0).unwrap().radius(), 1.0);
    }
}
