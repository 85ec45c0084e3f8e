//! Piecewise computed paths and their η-neighbourhoods.

use serde::Serialize;

use crate::metric::{check_dim, GeometryError, MetricSpec, StatePoint};
use crate::plant::ControlPoint;
use crate::scalar::Scalar;
use crate::zone::Zone;

/// `y_{n+1}` on `[nλ, (n+1)λ]`, sampled at the integrator step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSegment<T> {
    pub start_index: usize,
    pub start_time: T,
    pub step: T,
    pub initial: StatePoint<T>,
    pub control: ControlPoint<T>,
    pub samples: Vec<StatePoint<T>>,
}

impl<T: Scalar> PathSegment<T> {
    pub fn end_time(&self) -> T {
        self.start_time + self.step * T::of((self.samples.len() - 1) as f64)
    }

    pub fn sample_time(&self, k: usize) -> T {
        self.start_time + self.step * T::of(k as f64)
    }

    /// Linear interpolation between samples; `None` outside the segment.
    pub fn eval(&self, t: T) -> Option<Vec<T>> {
        let pos = ((t - self.start_time) / self.step).as_f64();
        let last = self.samples.len() - 1;
        if pos < -1e-9 || pos > last as f64 + 1e-9 {
            return None;
        }
        let pos = pos.clamp(0.0, last as f64);
        let k = (pos.floor() as usize).min(last);
        let frac = pos - k as f64;
        if frac < 1e-12 || k == last {
            return Some(self.samples[k].coords().to_vec());
        }
        let f = T::of(frac);
        let (a, b) = (self.samples[k].coords(), self.samples[k + 1].coords());
        Some(a.iter().zip(b).map(|(x, y)| *x + f * (*y - *x)).collect())
    }
}

/// Disjoint union of consecutive segments. Neighbouring segments need not
/// agree where they meet; inside the overlap instant the later segment is
/// used, except at the very end of coverage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointPath<T> {
    lambda: T,
    segments: Vec<PathSegment<T>>,
}

impl<T: Scalar> DisjointPath<T> {
    pub fn new(lambda: T, segments: Vec<PathSegment<T>>) -> Result<Self, GeometryError> {
        if !(lambda > T::zero()) {
            return Err(GeometryError::Invalid(format!("lambda {lambda} must be positive")));
        }
        if segments.is_empty() {
            return Err(GeometryError::Invalid("a path needs at least one segment".into()));
        }
        let dim = segments[0].initial.dim();
        for (k, s) in segments.iter().enumerate() {
            if s.samples.is_empty() {
                return Err(GeometryError::Invalid(format!("segment {k} has no samples")));
            }
            if s.start_index != segments[0].start_index + k {
                return Err(GeometryError::Invalid(format!(
                    "segment {k} has index {}, expected {}",
                    s.start_index,
                    segments[0].start_index + k
                )));
            }
            for p in &s.samples {
                check_dim("path sample", dim, p.dim())?;
            }
        }
        Ok(Self { lambda, segments })
    }

    /// A path sampled from a closure, one segment per λ. Handy for
    /// fixtures and for wrapping analytic references.
    pub fn from_fn(
        lambda: T,
        n_segments: usize,
        step: T,
        f: impl Fn(T) -> Vec<T>,
    ) -> Result<Self, GeometryError> {
        let per = crate::integrate::substeps(lambda, step);
        let h = lambda / T::of(per as f64);
        let segments = (0..n_segments)
            .map(|n| {
                let t0 = lambda * T::of(n as f64);
                let samples: Vec<StatePoint<T>> = (0..=per)
                    .map(|k| StatePoint::new(f(t0 + h * T::of(k as f64))))
                    .collect::<Result<_, _>>()?;
                let initial = samples[0].clone();
                Ok(PathSegment {
                    start_index: n,
                    start_time: t0,
                    step: h,
                    control: ControlPoint::new(initial.clone(), vec![]),
                    initial,
                    samples,
                })
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Self::new(lambda, segments)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn segments(&self) -> &[PathSegment<T>] {
        &self.segments
    }

    pub fn dim(&self) -> usize {
        self.segments[0].initial.dim()
    }

    pub fn start_time(&self) -> T {
        self.segments[0].start_time
    }

    pub fn end_time(&self) -> T {
        self.segments.last().map(|s| s.end_time()).unwrap_or_else(T::zero)
    }

    /// Index into `segments` of the piece responsible for time `t`.
    pub fn segment_for(&self, t: T) -> Result<usize, GeometryError> {
        let (start, end) = (self.start_time(), self.end_time());
        let slack = self.lambda * T::of(1e-9);
        if t < start - slack || t > end + slack {
            return Err(GeometryError::OutsideCoverage {
                time: t.as_f64(),
                start: start.as_f64(),
                end: end.as_f64(),
            });
        }
        let k = ((t - start) / self.lambda + T::of(1e-9)).floor().as_f64().max(0.0) as usize;
        Ok(k.min(self.segments.len() - 1))
    }

    pub fn eval(&self, t: T) -> Result<Vec<T>, GeometryError> {
        let k = self.segment_for(t)?;
        self.eval_in_segment(k, t)
    }

    /// Evaluates segment `k` at `t`, including its own right endpoint.
    pub fn eval_in_segment(&self, k: usize, t: T) -> Result<Vec<T>, GeometryError> {
        let seg = &self.segments[k];
        seg.eval(t).ok_or(GeometryError::OutsideCoverage {
            time: t.as_f64(),
            start: seg.start_time.as_f64(),
            end: seg.end_time().as_f64(),
        })
    }
}

/// The η-tube `{(x,t) : d(x, y(t)) < η}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tube<T> {
    path: DisjointPath<T>,
    radius: T,
}

impl<T: Scalar> Tube<T> {
    pub fn new(path: DisjointPath<T>, radius: T) -> Result<Self, GeometryError> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(GeometryError::Invalid(format!("tube radius {radius} must be positive")));
        }
        Ok(Self { path, radius })
    }

    pub fn path(&self) -> &DisjointPath<T> {
        &self.path
    }

    pub fn radius(&self) -> T {
        self.radius
    }
}

/// Strict membership: `d(x, y(t)) < η`.
pub fn tube_contains<T: Scalar>(
    tube: &Tube<T>,
    time: T,
    x: &StatePoint<T>,
    m: &MetricSpec<T>,
) -> Result<bool, GeometryError> {
    let centre = tube.path.eval(time)?;
    Ok(m.dist(x.coords(), &centre)? < tube.radius)
}

/// Outcome of a sampled clearance check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clearance<T> {
    pub clear: bool,
    /// First offending `(time, centre)` in time order.
    pub witness: Option<(T, Vec<T>)>,
    pub samples: usize,
    pub label: &'static str,
}

/// Default clearance sampling step, a tenth of the oracle step.
pub fn default_sample_step<T: Scalar>(lambda: T) -> T {
    lambda / T::of(10.0)
}

pub fn tube_clear_of_zone<T: Scalar>(
    tube: &Tube<T>,
    a: &Zone<T>,
    m: &MetricSpec<T>,
    sample_step: T,
) -> Result<Clearance<T>, GeometryError> {
    tube_clear_of_zone_with_margin(tube, a, m, sample_step, T::zero())
}

/// Samples each segment's centreline every `sample_step` (plus its right
/// endpoint) and reports the first centre within `η + margin` of `a`.
pub fn tube_clear_of_zone_with_margin<T: Scalar>(
    tube: &Tube<T>,
    a: &Zone<T>,
    m: &MetricSpec<T>,
    sample_step: T,
    margin: T,
) -> Result<Clearance<T>, GeometryError> {
    if !(sample_step > T::zero()) {
        return Err(GeometryError::Invalid(format!("sample step {sample_step} must be positive")));
    }
    check_dim("metric", tube.path.dim(), m.dim())?;
    let reach = tube.radius + margin;
    let mut samples = 0;
    for (k, seg) in tube.path.segments.iter().enumerate() {
        let (t0, t1) = (seg.start_time, seg.end_time());
        let n = crate::integrate::substeps((t1 - t0).max(sample_step), sample_step);
        for i in 0..=n {
            let t = if i == n { t1 } else { (t0 + sample_step * T::of(i as f64)).min(t1) };
            let centre = tube.path.eval_in_segment(k, t)?;
            samples += 1;
            if a.depth(&centre, Some(m))? > -reach {
                return Ok(Clearance {
                    clear: false,
                    witness: Some((t, centre)),
                    samples,
                    label: "sampled",
                });
            }
        }
    }
    Ok(Clearance {
        clear: true,
        witness: None,
        samples,
        label: "sampled",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> StatePoint<f64> {
        StatePoint::new(v.to_vec()).unwrap()
    }

    fn constant(n: usize) -> Tube<f64> {
        Tube::new(DisjointPath::from_fn(1.0, n, 0.1, |_| vec![0.0]).unwrap(), 1.0).unwrap()
    }

    fn ramp(radius: f64) -> Tube<f64> {
        Tube::new(DisjointPath::from_fn(1.0, 10, 0.1, |t| vec![t]).unwrap(), radius).unwrap()
    }

    #[test]
    fn centre_is_inside() {
        let m = MetricSpec::euclidean(1);
        let tube = constant(3);
        for t in [0.0, 0.5, 1.0, 2.99, 3.0] {
            assert!(tube_contains(&tube, t, &pt(&[0.0]), &m).unwrap());
        }
    }

    #[test]
    fn boundary_is_outside() {
        let m = MetricSpec::euclidean(1);
        let tube = constant(2);
        assert!(!tube_contains(&tube, 0.7, &pt(&[1.0]), &m).unwrap());
        assert!(!tube_contains(&tube, 0.7, &pt(&[-1.0]), &m).unwrap());
    }

    #[test]
    fn ramp_membership() {
        let m = MetricSpec::euclidean(1);
        let tube = Tube::new(DisjointPath::from_fn(1.0, 1, 0.1, |t| vec![t]).unwrap(), 0.1).unwrap();
        assert!(tube_contains(&tube, 0.5, &pt(&[0.55]), &m).unwrap());
        assert!(!tube_contains(&tube, 0.5, &pt(&[0.65]), &m).unwrap());
    }

    #[test]
    fn time_outside_coverage_errors() {
        let m = MetricSpec::euclidean(1);
        let err = tube_contains(&constant(2), 2.5, &pt(&[0.0]), &m).unwrap_err();
        assert!(matches!(err, GeometryError::OutsideCoverage { .. }));
    }

    #[test]
    fn nonpositive_radius_rejected() {
        let p = DisjointPath::from_fn(1.0, 1, 0.1, |_| vec![0.0]).unwrap();
        assert!(Tube::new(p.clone(), 0.0).is_err());
        assert!(Tube::new(p, -1.0).is_err());
    }

    #[test]
    fn segments_need_not_agree() {
        let seg = |n: usize, v: f64| PathSegment {
            start_index: n,
            start_time: n as f64,
            step: 0.5,
            initial: pt(&[v]),
            control: ControlPoint::new(pt(&[v]), vec![]),
            samples: vec![pt(&[v]), pt(&[v]), pt(&[v])],
        };
        let p = DisjointPath::new(1.0, vec![seg(0, 0.0), seg(1, 5.0)]).unwrap();
        assert_eq!(p.eval(0.99).unwrap(), vec![0.0]);
        assert_eq!(p.eval(1.0).unwrap(), vec![5.0]);
        assert_eq!(p.eval_in_segment(0, 1.0).unwrap(), vec![0.0]);
        assert_eq!(p.eval(2.0).unwrap(), vec![5.0]);
        assert!(DisjointPath::new(1.0, vec![seg(0, 0.0), seg(2, 5.0)]).is_err());
    }

    #[test]
    fn far_zone_is_clear() {
        let m = MetricSpec::euclidean(1);
        let tube = Tube::new(DisjointPath::from_fn(1.0, 10, 0.1, |_| vec![0.0]).unwrap(), 0.1).unwrap();
        let c = tube_clear_of_zone(&tube, &Zone::interval(5.0, 6.0), &m, 0.1).unwrap();
        assert!(c.clear);
        assert_eq!(c.label, "sampled");
    }

    #[test]
    fn crossing_path_hits_near_five() {
        let m = MetricSpec::euclidean(1);
        let c = tube_clear_of_zone(&ramp(0.1), &Zone::interval(5.0, 6.0), &m, 0.1).unwrap();
        assert!(!c.clear);
        let (t, x) = c.witness.unwrap();
        assert!((t - 5.0).abs() <= 0.1 + 1e-9, "witness time {t}");
        assert!(x[0] > 4.9 - 1e-9);
    }

    #[test]
    fn empty_union_is_clear() {
        let m = MetricSpec::euclidean(1);
        let c = tube_clear_of_zone(&ramp(0.5), &Zone::union(vec![]), &m, 0.05).unwrap();
        assert!(c.clear);
        assert!(c.samples > 100);
    }

    #[test]
    fn margin_widens_the_check() {
        let m = MetricSpec::euclidean(1);
        let tube = constant(1);
        let z = Zone::interval(1.5, 2.0);
        assert!(tube_clear_of_zone(&tube, &z, &m, 0.1).unwrap().clear);
        assert!(!tube_clear_of_zone_with_margin(&tube, &z, &m, 0.1, 0.6).unwrap().clear);
    }

    proptest! {
        #[test]
        fn membership_monotone_in_radius(x in -3.0f64..3.0, t in 0.0f64..2.0, r in 0.01f64..2.0, extra in 0.0f64..2.0) {
            let m = MetricSpec::euclidean(1);
            let path = DisjointPath::from_fn(1.0, 2, 0.1, |s: f64| vec![s.sin()]).unwrap();
            let small = Tube::new(path.clone(), r).unwrap();
            let big = Tube::new(path, r + extra + 1e-12).unwrap();
            if tube_contains(&small, t, &pt(&[x]), &m).unwrap() {
                prop_assert!(tube_contains(&big, t, &pt(&[x]), &m).unwrap());
            }
        }

        #[test]
        fn clear_tube_members_avoid_zone(
            lo in -4.0f64..4.0, w in 0.0f64..2.0, r in 0.05f64..1.0, t in 0usize..=30, off in -1.0f64..1.0,
        ) {
            let m = MetricSpec::euclidean(1);
            let tube = Tube::new(DisjointPath::from_fn(1.0, 3, 0.1, |s| vec![s - 1.5]).unwrap(), r).unwrap();
            let z = Zone::interval(lo, lo + w);
            if tube_clear_of_zone(&tube, &z, &m, 0.1).unwrap().clear {
                let time = t as f64 * 0.1;
                let x = pt(&[time - 1.5 + off * r * 0.999]);
                if tube_contains(&tube, time, &x, &m).unwrap() {
                    prop_assert!(!z.member(x.coords()).unwrap());
                }
            }
        }
    }
}
