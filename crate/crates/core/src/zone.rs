//! Zone algebra: start, end and avoidance regions, preconditions,
//! postconditions and selection boxes are all [`Zone`]s.
//!
//! Zones are closed sets; their complements are open. Margin queries use a
//! signed depth (positive inside, negative outside) that is exact for boxes,
//! half-spaces and unweighted balls, and errs towards the boundary
//! otherwise, so a positive margin never over-reports clearance.

use serde::{Deserialize, Serialize};

use crate::metric::{check_dim, GeometryError, MetricSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Zone<T> {
    /// The empty set.
    Empty,
    /// Axis-aligned box `lo <= x <= hi`; bounds may be infinite.
    Box { lo: Vec<T>, hi: Vec<T> },
    /// Closed Euclidean ball in raw coordinates.
    Ball { center: Vec<T>, radius: T },
    /// `normal . x <= offset`.
    HalfSpace { normal: Vec<T>, offset: T },
    Union { of: Vec<Zone<T>> },
    Intersection { of: Vec<Zone<T>> },
    /// Closure-free complement of a zone.
    Complement { of: Box<Zone<T>> },
    /// A zone over a subset of the coordinates (cylinder set).
    Slice { axes: Vec<usize>, zone: Box<Zone<T>> },
}

impl<T: Scalar> Zone<T> {
    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Self {
        Zone::Box { lo, hi }
    }

    pub fn interval(lo: T, hi: T) -> Self {
        Zone::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn ball(center: Vec<T>, radius: T) -> Self {
        Zone::Ball { center, radius }
    }

    pub fn half_space(normal: Vec<T>, offset: T) -> Self {
        Zone::HalfSpace { normal, offset }
    }

    pub fn union(of: Vec<Zone<T>>) -> Self {
        Zone::Union { of }
    }

    pub fn intersection(of: Vec<Zone<T>>) -> Self {
        Zone::Intersection { of }
    }

    pub fn complement(of: Zone<T>) -> Self {
        Zone::Complement { of: Box::new(of) }
    }

    /// `self \ other`.
    pub fn minus(self, other: Zone<T>) -> Self {
        Zone::intersection(vec![self, Zone::complement(other)])
    }

    pub fn slice(axes: Vec<usize>, zone: Zone<T>) -> Self {
        Zone::Slice {
            axes,
            zone: Box::new(zone),
        }
    }

    /// Structural checks: bound ordering, radius sign, slice axes in range.
    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match self {
            Zone::Empty => Ok(()),
            Zone::Box { lo, hi } => {
                check_dim("box lower bound", dim, lo.len())?;
                check_dim("box upper bound", dim, hi.len())?;
                for (i, (l, h)) in lo.iter().zip(hi).enumerate() {
                    if l.is_nan() || h.is_nan() || l > h {
                        return Err(GeometryError::Invalid(format!(
                            "box axis {i}: lower bound {l} exceeds upper bound {h}"
                        )));
                    }
                }
                Ok(())
            }
            Zone::Ball { center, radius } => {
                check_dim("ball center", dim, center.len())?;
                if !(*radius >= T::zero()) || !radius.is_finite() {
                    return Err(GeometryError::Invalid(format!("ball radius {radius} invalid")));
                }
                Ok(())
            }
            Zone::HalfSpace { normal, offset } => {
                check_dim("half-space normal", dim, normal.len())?;
                if normal.iter().all(|n| *n == T::zero()) || offset.is_nan() {
                    return Err(GeometryError::Invalid("degenerate half-space".into()));
                }
                Ok(())
            }
            Zone::Union { of } | Zone::Intersection { of } => {
                of.iter().try_for_each(|z| z.validate(dim))
            }
            Zone::Complement { of } => of.validate(dim),
            Zone::Slice { axes, zone } => {
                if let Some(a) = axes.iter().find(|a| **a >= dim) {
                    return Err(GeometryError::Invalid(format!(
                        "slice axis {a} out of range for dimension {dim}"
                    )));
                }
                zone.validate(axes.len())
            }
        }
    }

    /// Plain closed membership.
    pub fn member(&self, x: &[T]) -> Result<bool, GeometryError> {
        Ok(match self {
            Zone::Empty => false,
            Zone::Box { lo, hi } => {
                check_dim("point", lo.len(), x.len())?;
                x.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *l <= *v && *v <= *h)
            }
            Zone::Ball { center, radius } => {
                check_dim("point", center.len(), x.len())?;
                euclid(center, x) <= *radius
            }
            Zone::HalfSpace { normal, offset } => {
                check_dim("point", normal.len(), x.len())?;
                dot(normal, x) <= *offset
            }
            Zone::Union { of } => {
                for z in of {
                    if z.member(x)? {
                        return Ok(true);
                    }
                }
                false
            }
            Zone::Intersection { of } => {
                for z in of {
                    if !z.member(x)? {
                        return Ok(false);
                    }
                }
                true
            }
            Zone::Complement { of } => !of.member(x)?,
            Zone::Slice { axes, zone } => zone.member(&project(axes, x)?)?,
        })
    }

    /// Signed depth: distance to the boundary when inside (positive), minus
    /// the distance to the zone when outside. `metric` of `None` means
    /// Euclidean.
    pub fn depth(&self, x: &[T], metric: Option<&MetricSpec<T>>) -> Result<T, GeometryError> {
        if let Some(m) = metric {
            check_dim("point", m.dim(), x.len())?;
        }
        self.depth_w(x, metric.map(|m| m.weights()))
    }

    fn depth_w(&self, x: &[T], w: Option<&[T]>) -> Result<T, GeometryError> {
        let wt = |i: usize| w.map_or(T::one(), |w| w[i]);
        Ok(match self {
            Zone::Empty => T::neg_infinity(),
            Zone::Box { lo, hi } => {
                check_dim("point", lo.len(), x.len())?;
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *l <= *v && *v <= *h);
                if inside {
                    (0..x.len())
                        .map(|i| wt(i).sqrt() * (x[i] - lo[i]).min(hi[i] - x[i]))
                        .fold(T::infinity(), T::min)
                } else {
                    let sq: T = (0..x.len())
                        .map(|i| {
                            let e = (lo[i] - x[i]).max(x[i] - hi[i]).max(T::zero());
                            wt(i) * e * e
                        })
                        .sum();
                    -sq.sqrt()
                }
            }
            Zone::Ball { center, radius } => {
                check_dim("point", center.len(), x.len())?;
                let scale = w.map_or(T::one(), |w| {
                    w.iter().copied().fold(T::infinity(), T::min).sqrt()
                });
                scale * (*radius - euclid(center, x))
            }
            Zone::HalfSpace { normal, offset } => {
                check_dim("point", normal.len(), x.len())?;
                let dual: T = (0..normal.len())
                    .map(|i| normal[i] * normal[i] / wt(i))
                    .sum::<T>()
                    .sqrt();
                (*offset - dot(normal, x)) / dual
            }
            Zone::Union { of } => {
                let mut best = T::neg_infinity();
                for z in of {
                    best = best.max(z.depth_w(x, w)?);
                }
                best
            }
            Zone::Intersection { of } => {
                let mut worst = T::infinity();
                for z in of {
                    worst = worst.min(z.depth_w(x, w)?);
                }
                worst
            }
            Zone::Complement { of } => -of.depth_w(x, w)?,
            Zone::Slice { axes, zone } => {
                let px = project(axes, x)?;
                match w {
                    Some(w) => {
                        let pw: Vec<T> = axes.iter().map(|a| w[*a]).collect();
                        zone.depth_w(&px, Some(&pw))?
                    }
                    None => zone.depth_w(&px, None)?,
                }
            }
        })
    }

    /// Membership with a clearance margin.
    ///
    /// `margin > 0` shrinks the zone: the point must lie inside and at least
    /// `margin` from the boundary. `margin < 0` grows it by `|margin|`.
    /// `margin == 0` is plain membership.
    pub fn contains_with(
        &self,
        x: &[T],
        margin: T,
        metric: Option<&MetricSpec<T>>,
    ) -> Result<bool, GeometryError> {
        let inside = self.member(x)?;
        if margin == T::zero() {
            return Ok(inside);
        }
        let depth = self.depth(x, metric)?;
        if margin > T::zero() {
            Ok(inside && depth >= margin)
        } else {
            Ok(inside || depth >= margin)
        }
    }

    /// Axis-aligned bounds of the zone (possibly infinite, `lo > hi` when
    /// provably empty).
    pub fn bounds(&self, dim: usize) -> (Vec<T>, Vec<T>) {
        let full = || (vec![T::neg_infinity(); dim], vec![T::infinity(); dim]);
        match self {
            Zone::Empty => (vec![T::infinity(); dim], vec![T::neg_infinity(); dim]),
            Zone::Box { lo, hi } => (lo.clone(), hi.clone()),
            Zone::Ball { center, radius } => (
                center.iter().map(|c| *c - *radius).collect(),
                center.iter().map(|c| *c + *radius).collect(),
            ),
            Zone::HalfSpace { normal, offset } => {
                let (mut lo, mut hi) = full();
                let nz: Vec<usize> = (0..normal.len()).filter(|i| normal[*i] != T::zero()).collect();
                if nz.len() == 1 {
                    let i = nz[0];
                    let b = *offset / normal[i];
                    if normal[i] > T::zero() {
                        hi[i] = b;
                    } else {
                        lo[i] = b;
                    }
                }
                (lo, hi)
            }
            Zone::Union { of } => {
                let mut acc = (vec![T::infinity(); dim], vec![T::neg_infinity(); dim]);
                for z in of {
                    let (l, h) = z.bounds(dim);
                    for i in 0..dim {
                        acc.0[i] = acc.0[i].min(l[i]);
                        acc.1[i] = acc.1[i].max(h[i]);
                    }
                }
                acc
            }
            Zone::Intersection { of } => {
                let mut acc = full();
                for z in of {
                    let (l, h) = z.bounds(dim);
                    for i in 0..dim {
                        acc.0[i] = acc.0[i].max(l[i]);
                        acc.1[i] = acc.1[i].min(h[i]);
                    }
                }
                acc
            }
            Zone::Complement { .. } => full(),
            Zone::Slice { axes, zone } => {
                let (mut lo, mut hi) = full();
                let (l, h) = zone.bounds(axes.len());
                for (k, a) in axes.iter().enumerate() {
                    if *a < dim {
                        lo[*a] = l[k];
                        hi[*a] = h[k];
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// Free-function form of [`Zone::contains_with`] under the Euclidean metric.
pub fn zone_contains<T: Scalar>(z: &Zone<T>, x: &[T], margin: T) -> Result<bool, GeometryError> {
    z.contains_with(x, margin, None)
}

fn euclid<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn project<T: Scalar>(axes: &[usize], x: &[T]) -> Result<Vec<T>, GeometryError> {
    axes.iter()
        .map(|a| {
            x.get(*a).copied().ok_or(GeometryError::Dimension {
                what: "point",
                expected: a + 1,
                found: x.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn box_membership() {
        let z = Zone::interval(0.0, 10.0);
        assert!(zone_contains(&z, &[5.0], 0.0).unwrap());
        assert!(zone_contains(&z, &[10.0], 0.0).unwrap());
        assert!(!zone_contains(&z, &[10.5], 0.0).unwrap());
    }

    #[test]
    fn positive_margin_shrinks() {
        let z = Zone::interval(0.0, 10.0);
        assert!(!zone_contains(&z, &[1.0], 2.0).unwrap());
        assert!(zone_contains(&z, &[2.0], 2.0).unwrap());
        assert!(zone_contains(&z, &[5.0], 2.0).unwrap());
    }

    #[test]
    fn negative_margin_grows() {
        let z = Zone::interval(0.0, 10.0);
        assert!(zone_contains(&z, &[11.5], -2.0).unwrap());
        assert!(!zone_contains(&z, &[12.5], -2.0).unwrap());
    }

    #[test]
    fn ball_center_with_margin() {
        let z = Zone::ball(vec![0.0, 0.0], 1.0);
        assert!(zone_contains(&z, &[0.0, 0.0], 0.5).unwrap());
        assert!(!zone_contains(&z, &[0.0, 0.8], 0.5).unwrap());
    }

    #[test]
    fn half_space_depth_is_exact() {
        // x + y <= 2
        let z = Zone::half_space(vec![1.0, 1.0], 2.0);
        let d = z.depth(&[0.0, 0.0], None).unwrap();
        assert!((d - 2.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(z.depth(&[2.0, 2.0], None).unwrap() < 0.0);
    }

    #[test]
    fn weighted_box_depth() {
        let m = MetricSpec::new(vec![4.0]).unwrap();
        let z = Zone::interval(0.0, 10.0);
        assert_eq!(z.depth(&[1.0], Some(&m)).unwrap(), 2.0);
        assert_eq!(z.depth(&[12.0], Some(&m)).unwrap(), -4.0);
    }

    #[test]
    fn set_operations() {
        let a = Zone::interval(0.0, 2.0);
        let b = Zone::interval(1.0, 3.0);
        let u = Zone::union(vec![a.clone(), b.clone()]);
        let i = Zone::intersection(vec![a.clone(), b.clone()]);
        let d = a.clone().minus(b.clone());
        assert!(u.member(&[2.5]).unwrap());
        assert!(!i.member(&[0.5]).unwrap());
        assert!(i.member(&[1.5]).unwrap());
        assert!(d.member(&[0.5]).unwrap());
        assert!(!d.member(&[1.0]).unwrap());
        assert!(!Zone::<f64>::union(vec![]).member(&[0.0]).unwrap());
    }

    #[test]
    fn slice_acts_on_selected_axes() {
        // Planet in the first three coordinates of a 7-d state.
        let planet = Zone::slice(vec![0, 1, 2], Zone::ball(vec![0.0; 3], 1.0));
        let inside = [0.5, 0.0, 0.0, 9.0, 9.0, 9.0, 100.0];
        let outside = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(planet.member(&inside).unwrap());
        assert!(!planet.member(&outside).unwrap());
        assert!((planet.depth(&outside, None).unwrap() + 1.0_f64).abs() < 1e-12);
        assert!(planet.validate(7).is_ok());
        assert!(planet.validate(2).is_err());
    }

    #[test]
    fn dimension_errors() {
        let z = Zone::interval(0.0, 1.0);
        assert!(z.member(&[0.0, 1.0]).is_err());
        assert!(Zone::boxed(vec![1.0], vec![0.0]).validate(1).is_err());
    }

    #[test]
    fn bounds_of_composites() {
        let z = Zone::intersection(vec![
            Zone::boxed(vec![0.0, -1.0], vec![4.0, 1.0]),
            Zone::half_space(vec![1.0, 0.0], 3.0),
        ]);
        let (lo, hi) = z.bounds(2);
        assert_eq!(lo, vec![0.0, -1.0]);
        assert_eq!(hi, vec![3.0, 1.0]);
    }

    #[test]
    fn toml_round_trip() {
        let z = Zone::union(vec![
            Zone::boxed(vec![0.0, f64::NEG_INFINITY], vec![1.0, f64::INFINITY]),
            Zone::complement(Zone::ball(vec![0.0, 0.0], 2.0)),
        ]);
        #[derive(Serialize, Deserialize)]
        struct W {
            z: Zone<f64>,
        }
        let text = toml::to_string(&W { z: z.clone() }).unwrap();
        let back: W = toml::from_str(&text).unwrap();
        assert_eq!(back.z, z);
    }

    fn zone_strategy() -> impl Strategy<Value = Zone<f64>> {
        let leaf = prop_oneof![
            (-5.0f64..5.0, 0.0f64..5.0, -5.0f64..5.0, 0.0f64..5.0)
                .prop_map(|(a, w, b, h)| Zone::boxed(vec![a, b], vec![a + w, b + h])),
            (-5.0f64..5.0, -5.0f64..5.0, 0.1f64..4.0)
                .prop_map(|(x, y, r)| Zone::ball(vec![x, y], r)),
            (-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0)
                .prop_filter("nondegenerate", |(a, b, _)| a.abs() + b.abs() > 0.1)
                .prop_map(|(a, b, c)| Zone::half_space(vec![a, b], c)),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..3).prop_map(Zone::union),
                prop::collection::vec(inner.clone(), 1..3).prop_map(Zone::intersection),
                inner.prop_map(Zone::complement),
            ]
        })
    }

    proptest! {
        #[test]
        fn margin_is_monotone(
            z in zone_strategy(),
            x in prop::collection::vec(-8.0f64..8.0, 2),
            m1 in -3.0f64..3.0,
            m2 in -3.0f64..3.0,
        ) {
            let (hi, lo) = if m1 >= m2 { (m1, m2) } else { (m2, m1) };
            if zone_contains(&z, &x, hi).unwrap() {
                prop_assert!(zone_contains(&z, &x, lo).unwrap());
            }
        }

        #[test]
        fn positive_margin_never_optimistic_for_leaves(
            a in -5.0f64..5.0, w in 0.5f64..5.0,
            x in -8.0f64..8.0, m in 0.01f64..2.0,
        ) {
            // Exhaustive 1-d check: shrunk membership implies every point
            // within m is still inside.
            let z = Zone::interval(a, a + w);
            if zone_contains(&z, &[x], m).unwrap() {
                prop_assert!(z.member(&[x - m * 0.999]).unwrap());
                prop_assert!(z.member(&[x + m * 0.999]).unwrap());
            }
        }
    }
}
