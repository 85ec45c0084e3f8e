//! Strategy verification: sampled compatibility and completeness checks,
//! strategy-graph construction, all-paths-reach-end search, bad-set
//! estimation and effective avoidance zones.
//!
//! Every set check here is a grid sample. Reports carry the label
//! `"sampled"`; nothing in this module is a proof.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{GeometryError, StatePoint};
use crate::modes::{CoordMap, ModeError, Strategy, TransitionMap, TransitionRegistry, Triple, TripleId};
use crate::plant::ControlPoint;
use crate::predictor::{calculate_path, ModelSpec, PredictError};
use crate::scalar::Scalar;
use crate::seeding::{rng_for, unit_ball};
use crate::zone::Zone;

pub const SAMPLED: &str = "sampled";
const MAX_VIOLATIONS: usize = 16;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("no sampling grid for mode {0}")]
    NoGrid(String),
    #[error("strategy graph has no start vertex")]
    NoStart,
    #[error("unknown triple {0}")]
    UnknownTriple(TripleId),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

/// A rectangular sample grid: `lo + k * spacing` on each axis, with `hi`
/// always included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub spacing: Vec<T>,
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(spacing: Vec<T>, lo: Vec<T>, hi: Vec<T>) -> Result<Self, VerifyError> {
        let g = Self { spacing, lo, hi };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(spacing: T, lo: Vec<T>, hi: Vec<T>) -> Result<Self, VerifyError> {
        Self::new(vec![spacing; lo.len()], lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.spacing.len() != self.lo.len() || self.hi.len() != self.lo.len() {
            return Err(VerifyError::Grid("spacing, lo and hi differ in length".into()));
        }
        for i in 0..self.dim() {
            if !(self.spacing[i] > T::zero()) || !self.spacing[i].is_finite() {
                return Err(VerifyError::Grid(format!("axis {i}: spacing must be positive")));
            }
            if !self.lo[i].is_finite() || !self.hi[i].is_finite() {
                return Err(VerifyError::Grid(format!("axis {i}: unbounded")));
            }
        }
        Ok(())
    }

    /// The grid cut down to the bounding box of `zone`. Axes keep their
    /// spacing and restart at the new lower bound.
    pub fn restrict(&self, zone: &Zone<T>) -> GridSpec<T> {
        let (zl, zh) = zone.bounds(self.dim());
        let lo = (0..self.dim()).map(|i| self.lo[i].max(zl[i])).collect();
        let hi = (0..self.dim()).map(|i| self.hi[i].min(zh[i])).collect();
        GridSpec {
            spacing: self.spacing.clone(),
            lo,
            hi,
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim()).any(|i| !(self.lo[i] <= self.hi[i]))
    }

    fn axis(&self, i: usize) -> Vec<T> {
        let (lo, hi, s) = (self.lo[i], self.hi[i], self.spacing[i]);
        let n = ((hi - lo) / s + T::of(1e-9)).floor().as_f64() as usize;
        let mut pts: Vec<T> = (0..=n).map(|k| lo + s * T::of(k as f64)).collect();
        let last = *pts.last().unwrap_or(&lo);
        if hi - last > s * T::of(1e-9) {
            pts.push(hi);
        } else if let Some(p) = pts.last_mut() {
            *p = (*p).min(hi);
        }
        pts
    }

    pub fn count(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        (0..self.dim()).map(|i| self.axis(i).len()).product()
    }

    /// Visits every grid point in odometer order; the slice is reused.
    pub fn for_each<E>(
        &self,
        mut f: impl FnMut(&[T]) -> Result<ControlFlow<()>, E>,
    ) -> Result<usize, E> {
        if self.is_empty() {
            return Ok(0);
        }
        let axes: Vec<Vec<T>> = (0..self.dim()).map(|i| self.axis(i)).collect();
        let mut idx = vec![0usize; axes.len()];
        let mut x: Vec<T> = axes.iter().map(|a| a[0]).collect();
        let mut visited = 0;
        loop {
            visited += 1;
            if f(&x)?.is_break() {
                return Ok(visited);
            }
            let mut k = axes.len();
            loop {
                if k == 0 {
                    return Ok(visited);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    x[k] = axes[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                x[k] = axes[k][0];
            }
        }
    }

    pub fn points(&self) -> Vec<Vec<T>> {
        let mut out = Vec::with_capacity(self.count());
        let _ = self.for_each::<()>(|x| {
            out.push(x.to_vec());
            Ok(ControlFlow::Continue(()))
        });
        out
    }
}

/// Per-mode grids, with an optional fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler<T> {
    pub default: Option<GridSpec<T>>,
    #[serde(default)]
    pub modes: indexmap::IndexMap<String, GridSpec<T>>,
}

impl<T: Scalar> Sampler<T> {
    pub fn uniform(grid: GridSpec<T>) -> Self {
        Self {
            default: Some(grid),
            modes: Default::default(),
        }
    }

    pub fn for_mode(&self, mode: &str) -> Result<&GridSpec<T>, VerifyError> {
        self.modes
            .get(mode)
            .or(self.default.as_ref())
            .ok_or_else(|| VerifyError::NoGrid(mode.into()))
    }
}

/// A set that can answer membership queries without being materialised.
pub trait Membership<T> {
    fn contains(&self, x: &[T]) -> Result<bool, GeometryError>;
}

impl<T: Scalar> Membership<T> for Zone<T> {
    fn contains(&self, x: &[T]) -> Result<bool, GeometryError> {
        self.member(x)
    }
}

/// `D(α→β)`: the states of `α` that land in `D` after `τ_βα`.
pub struct Pullback<'a, T> {
    pub map: &'a TransitionMap<T>,
    pub zone: &'a Zone<T>,
}

impl<T: Scalar> Membership<T> for Pullback<'_, T> {
    fn contains(&self, x: &[T]) -> Result<bool, GeometryError> {
        if !self.map.domain.member(x)? {
            return Ok(false);
        }
        match &self.map.map {
            CoordMap::Identity => self.zone.member(x),
            m => self.zone.member(&m.apply(x)?),
        }
    }
}

pub struct CompatTarget<'a, T> {
    pub label: String,
    pub region: &'a dyn Membership<T>,
    pub phi: &'a Zone<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum CompatViolation {
    /// `φ_j(x) = 1` but `x ∉ Z_j`.
    SelectorOutsideTarget { point: Vec<f64>, target: String },
    /// `x ∈ Y` but no `φ_j` fires.
    Uncovered { point: Vec<f64> },
}

impl CompatViolation {
    pub fn point(&self) -> &[f64] {
        match self {
            CompatViolation::SelectorOutsideTarget { point, .. } | CompatViolation::Uncovered { point } => point,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub compatible: bool,
    pub violations: Vec<CompatViolation>,
    pub samples: usize,
    pub vacuous: bool,
    pub label: String,
}

impl CompatReport {
    fn vacuous() -> Self {
        Self {
            compatible: true,
            violations: Vec::new(),
            samples: 0,
            vacuous: true,
            label: SAMPLED.into(),
        }
    }
}

/// `Y ⋐ ∪ Z_j` on the grid: every firing selector lands in its target and
/// every point of `Y` fires at least one selector. Stops after a handful
/// of violations.
pub fn check_compat<T: Scalar, Y: Membership<T> + ?Sized>(
    y: &Y,
    targets: &[CompatTarget<'_, T>],
    grid: &GridSpec<T>,
) -> Result<CompatReport, GeometryError> {
    let mut violations = Vec::new();
    let point = |x: &[T]| x.iter().map(|v| v.as_f64()).collect::<Vec<_>>();
    let samples = grid.for_each(|x| {
        let mut fired = false;
        for t in targets {
            if t.phi.member(x)? {
                fired = true;
                if !t.region.contains(x)? {
                    violations.push(CompatViolation::SelectorOutsideTarget {
                        point: point(x),
                        target: t.label.clone(),
                    });
                }
            }
        }
        if !fired && y.contains(x)? {
            violations.push(CompatViolation::Uncovered { point: point(x) });
        }
        Ok(if violations.len() >= MAX_VIOLATIONS {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        })
    })?;
    Ok(CompatReport {
        compatible: violations.is_empty(),
        violations,
        samples,
        vacuous: false,
        label: SAMPLED.into(),
    })
}

fn find<'a, T>(triples: &'a [Triple<T>], id: &TripleId) -> Result<&'a Triple<T>, VerifyError> {
    triples
        .iter()
        .find(|t| &t.id == id)
        .ok_or_else(|| VerifyError::UnknownTriple(id.clone()))
}

/// `post_(α,i) ⋐ ∪ pre_(β,j)(α→β)` over `C_(α,i)`, sampled on the mode's
/// grid cut to the bounding box of the postcondition.
pub fn completeness_at<T: Scalar>(
    strategy: &Strategy<T>,
    triples: &[Triple<T>],
    transitions: &TransitionRegistry<T>,
    sampler: &Sampler<T>,
    id: &TripleId,
) -> Result<CompatReport, VerifyError> {
    let triple = find(triples, id)?;
    if triple.is_end {
        return Ok(CompatReport::vacuous());
    }
    let grid = sampler.for_mode(&id.mode)?.restrict(&triple.post);
    if grid.is_empty() {
        return Ok(CompatReport::vacuous());
    }
    let succ = strategy.successors(id);
    let mut maps = Vec::with_capacity(succ.len());
    let mut pres = Vec::with_capacity(succ.len());
    for phi in succ {
        let target = find(triples, &phi.target)?;
        maps.push(transitions.lookup(&id.mode, &phi.target.mode)?);
        pres.push(&target.pre);
    }
    let pulls: Vec<Pullback<'_, T>> = maps
        .iter()
        .zip(&pres)
        .map(|(map, zone)| Pullback { map, zone })
        .collect();
    let targets: Vec<CompatTarget<'_, T>> = succ
        .iter()
        .zip(&pulls)
        .map(|(phi, p)| CompatTarget {
            label: phi.target.to_string(),
            region: p,
            phi: &phi.zone,
        })
        .collect();
    Ok(check_compat(&triple.post, &targets, &grid)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCheck {
    pub id: TripleId,
    pub start: bool,
    pub end: bool,
    pub complete: bool,
    pub report: Option<CompatReport>,
}

/// Triples as vertices; edges only out of complete vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyGraph {
    pub vertices: Vec<VertexCheck>,
    pub edges: Vec<Vec<usize>>,
}

impl StrategyGraph {
    /// A bare graph, every vertex complete; for tests and hand-built
    /// topologies.
    pub fn from_edges(ids: Vec<TripleId>, starts: &[usize], ends: &[usize], edges: Vec<Vec<usize>>) -> Self {
        let vertices = ids
            .into_iter()
            .enumerate()
            .map(|(i, id)| VertexCheck {
                id,
                start: starts.contains(&i),
                end: ends.contains(&i),
                complete: true,
                report: None,
            })
            .collect();
        Self { vertices, edges }
    }

    pub fn index_of(&self, id: &TripleId) -> Option<usize> {
        self.vertices.iter().position(|v| &v.id == id)
    }

    pub fn has_edge(&self, from: &TripleId, to: &TripleId) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges[a].contains(&b),
            _ => false,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Graphviz description.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph strategy {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let shape = if v.end {
                "doublecircle"
            } else if v.start {
                "box"
            } else {
                "ellipse"
            };
            let style = if v.complete { "solid" } else { "dashed" };
            let _ = writeln!(s, "  v{i} [label=\"{}\", shape={shape}, style={style}];", v.id);
        }
        for (i, outs) in self.edges.iter().enumerate() {
            for j in outs {
                let _ = writeln!(s, "  v{i} -> v{j};");
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_strategy_graph<T: Scalar>(
    strategy: &Strategy<T>,
    triples: &[Triple<T>],
    transitions: &TransitionRegistry<T>,
    sampler: &Sampler<T>,
) -> Result<StrategyGraph, VerifyError> {
    let index: HashMap<&TripleId, usize> = triples.iter().enumerate().map(|(i, t)| (&t.id, i)).collect();
    for (from, succ) in &strategy.choices {
        if !index.contains_key(from) {
            return Err(VerifyError::UnknownTriple(from.clone()));
        }
        if let Some(phi) = succ.iter().find(|p| !index.contains_key(&p.target)) {
            return Err(VerifyError::UnknownTriple(phi.target.clone()));
        }
    }
    let mut vertices = Vec::with_capacity(triples.len());
    let mut edges = Vec::with_capacity(triples.len());
    for t in triples {
        let report = completeness_at(strategy, triples, transitions, sampler, &t.id)?;
        let complete = report.compatible;
        let mut out = Vec::new();
        if complete && !t.is_end {
            for phi in strategy.successors(&t.id) {
                let j = index[&phi.target];
                if !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        edges.push(out);
        vertices.push(VertexCheck {
            id: t.id.clone(),
            start: t.is_start,
            end: t.is_end,
            complete,
            report: Some(report),
        });
    }
    Ok(StrategyGraph { vertices, edges })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Counterexample {
    /// A path from a start to a non-end vertex with no way out.
    DeadEnd { path: Vec<TripleId> },
    /// A path from a start into a cycle that never meets an end vertex;
    /// `cycle` repeats its first vertex at the end.
    Cycle { prefix: Vec<TripleId>, cycle: Vec<TripleId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub verified: bool,
    pub counterexample: Option<Counterexample>,
    pub vertices_visited: usize,
    pub cycle_policy: String,
}

const CYCLE_POLICY: &str = "a reachable cycle avoiding every end vertex counts as a failure";

/// Depth-first search from every start. End vertices are terminal.
pub fn verify_strategy(g: &StrategyGraph) -> Result<VerificationResult, VerifyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnPath,
        Safe,
    }
    let starts: Vec<usize> = (0..g.vertices.len()).filter(|i| g.vertices[*i].start).collect();
    if starts.is_empty() {
        return Err(VerifyError::NoStart);
    }
    let ids = |path: &[usize]| path.iter().map(|i| g.vertices[*i].id.clone()).collect::<Vec<_>>();
    let mut mark = vec![Mark::New; g.vertices.len()];
    let mut visited = 0;
    let fail = |cx, visited| {
        Ok(VerificationResult {
            verified: false,
            counterexample: Some(cx),
            vertices_visited: visited,
            cycle_policy: CYCLE_POLICY.into(),
        })
    };
    for s in starts {
        if mark[s] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut enter = |v: usize, stack: &mut Vec<(usize, usize)>, mark: &mut Vec<Mark>| {
            visited += 1;
            if g.vertices[v].end {
                mark[v] = Mark::Safe;
                return true;
            }
            stack.push((v, 0));
            mark[v] = Mark::OnPath;
            !g.edges[v].is_empty()
        };
        if !enter(s, &mut stack, &mut mark) {
            return fail(Counterexample::DeadEnd { path: ids(&[s]) }, visited);
        }
        while let Some(&(v, next)) = stack.last() {
            if next == g.edges[v].len() {
                mark[v] = Mark::Safe;
                stack.pop();
                continue;
            }
            stack.last_mut().expect("nonempty").1 += 1;
            let w = g.edges[v][next];
            match mark[w] {
                Mark::Safe => {}
                Mark::OnPath => {
                    let path: Vec<usize> = stack.iter().map(|e| e.0).collect();
                    let at = path.iter().position(|u| *u == w).expect("on path");
                    let mut cycle = path[at..].to_vec();
                    cycle.push(w);
                    return fail(
                        Counterexample::Cycle {
                            prefix: ids(&path[..at]),
                            cycle: ids(&cycle),
                        },
                        visited,
                    );
                }
                Mark::New => {
                    if !enter(w, &mut stack, &mut mark) {
                        let path: Vec<usize> = stack.iter().map(|e| e.0).collect();
                        return fail(Counterexample::DeadEnd { path: ids(&path) }, visited);
                    }
                }
            }
        }
    }
    Ok(VerificationResult {
        verified: true,
        counterexample: None,
        vertices_visited: visited,
        cycle_policy: CYCLE_POLICY.into(),
    })
}

/// Exportable summary of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub result: VerificationResult,
    pub graph: StrategyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadSetParams<T> {
    pub lambda: T,
    pub epsilon: T,
    pub eta: T,
    /// Random starts per grid point on top of the centre and the `2k`
    /// axis extremes of the ε-ball.
    pub random_starts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadSetEstimate<T> {
    pub points: Vec<Vec<T>>,
    pub flags: Vec<bool>,
    pub cell: Vec<T>,
    pub lambda: T,
    pub epsilon: T,
    pub eta: T,
    pub seed: u64,
}

impl<T: Scalar> BadSetEstimate<T> {
    pub fn flagged(&self) -> impl Iterator<Item = &[T]> {
        self.points
            .iter()
            .zip(&self.flags)
            .filter(|(_, f)| **f)
            .map(|(p, _)| p.as_slice())
    }

    /// Union of grid-cell boxes around the flagged points.
    pub fn zone(&self) -> Zone<T> {
        let half: Vec<T> = self.cell.iter().map(|c| *c / T::of(2.0)).collect();
        let cells: Vec<Zone<T>> = self
            .flagged()
            .map(|p| {
                Zone::boxed(
                    p.iter().zip(&half).map(|(x, h)| *x - *h).collect(),
                    p.iter().zip(&half).map(|(x, h)| *x + *h).collect(),
                )
            })
            .collect();
        if cells.is_empty() {
            Zone::Empty
        } else {
            Zone::union(cells)
        }
    }
}

/// Flags grid points from which some ε-perturbed start may end one step
/// later within η of the chart boundary, or outside it.
pub fn compute_bad_set<T: Scalar>(
    model: &ModelSpec<T>,
    control: &ControlPoint<T>,
    chart: &Zone<T>,
    params: BadSetParams<T>,
    grid: &GridSpec<T>,
    seed: u64,
) -> Result<BadSetEstimate<T>, VerifyError> {
    grid.validate()?;
    let points = grid.points();
    if points.is_empty() {
        return Err(VerifyError::Grid("empty grid".into()));
    }
    let dim = grid.dim();
    let mut flags = Vec::with_capacity(points.len());
    for (i, a) in points.iter().enumerate() {
        let mut starts = vec![a.clone()];
        for k in 0..dim {
            for sign in [T::one(), -T::one()] {
                let mut s = a.clone();
                s[k] += sign * params.epsilon;
                starts.push(s);
            }
        }
        let mut rng = rng_for(seed, "bad-set", i as u64);
        for _ in 0..params.random_starts {
            let u = unit_ball(&mut rng, dim);
            starts.push(a.iter().zip(&u).map(|(x, d)| *x + params.epsilon * T::of(*d)).collect());
        }
        let mut bad = false;
        for s in starts {
            let s = StatePoint::new(s)?;
            match calculate_path(model, &s, control, 0, params.lambda) {
                Ok(seg) => {
                    let end = seg.samples.last().expect("segment has samples");
                    if !chart.contains_with(end.coords(), params.eta, None)? {
                        bad = true;
                    }
                }
                Err(PredictError::LeftChart { .. }) => bad = true,
                Err(e) => return Err(e.into()),
            }
            if bad {
                break;
            }
        }
        flags.push(bad);
    }
    Ok(BadSetEstimate {
        points,
        flags,
        cell: grid.spacing.clone(),
        lambda: params.lambda,
        epsilon: params.epsilon,
        eta: params.eta,
        seed,
    })
}

/// `A_α = (A ∩ U_α) ∪ (B \ E)`.
pub fn effective_avoidance<T: Scalar>(
    avoid: &Zone<T>,
    chart: &Zone<T>,
    bad: &BadSetEstimate<T>,
    end: &Zone<T>,
) -> Zone<T> {
    let base = Zone::intersection(vec![avoid.clone(), chart.clone()]);
    match bad.zone() {
        Zone::Empty => base,
        b => Zone::union(vec![base, b.minus(end.clone())]),
    }
}

/// Flagged grid points that fall inside `pre`.
pub fn bad_set_overlap<T: Scalar>(pre: &Zone<T>, bad: &BadSetEstimate<T>) -> Result<Vec<Vec<T>>, GeometryError> {
    let mut out = Vec::new();
    for p in bad.flagged() {
        if pre.member(p)? {
            out.push(p.to_vec());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::SelectionFunction;
    use crate::plant::VectorField;

    fn tid(m: &str, i: u32) -> TripleId {
        TripleId::new(m, i)
    }

    fn grid1(lo: f64, hi: f64, s: f64) -> GridSpec<f64> {
        GridSpec::new(vec![s], vec![lo], vec![hi]).unwrap()
    }

    #[test]
    fn grid_includes_both_ends() {
        let g = grid1(0.0, 1.0, 0.3);
        let pts = g.points();
        assert_eq!(pts.first().unwrap()[0], 0.0);
        assert_eq!(pts.last().unwrap()[0], 1.0);
        assert_eq!(pts.len(), 5);
        assert_eq!(grid1(0.0, 1.0, 0.25).count(), 5);
    }

    #[test]
    fn grid_rejects_unbounded_axes() {
        assert!(GridSpec::new(vec![1.0], vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(GridSpec::new(vec![0.0], vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn odometer_visits_product() {
        let g = GridSpec::new(vec![1.0, 0.5], vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let mut seen = Vec::new();
        g.for_each::<()>(|x| {
            seen.push(x.to_vec());
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[1], vec![0.0, 0.5]);
        assert_eq!(seen[8], vec![2.0, 1.0]);
    }

    fn compat_1d(phi2_lo: f64) -> CompatReport {
        let y = Zone::interval(0.0, 1.0);
        let z1 = Zone::interval(0.0, 0.6);
        let z2 = Zone::interval(0.4, 1.0);
        let p1 = Zone::interval(0.0, 0.5);
        // Half-open (lo, 1]: shrink by a hair below the grid pitch.
        let p2 = Zone::interval(phi2_lo + 1e-9, 1.0);
        let targets = [
            CompatTarget {
                label: "z1".into(),
                region: &z1,
                phi: &p1,
            },
            CompatTarget {
                label: "z2".into(),
                region: &z2,
                phi: &p2,
            },
        ];
        check_compat(&y, &targets, &grid1(-0.5, 1.5, 0.01)).unwrap()
    }

    #[test]
    fn overlapping_covers_are_compatible() {
        let r = compat_1d(0.5);
        assert!(r.compatible, "{:?}", r.violations);
        assert_eq!(r.label, "sampled");
        assert_eq!(r.samples, 201);
    }

    #[test]
    fn coverage_gap_reports_witness() {
        let r = compat_1d(0.7);
        assert!(!r.compatible);
        let first = &r.violations[0];
        assert!(matches!(first, CompatViolation::Uncovered { .. }));
        assert!(first.point()[0] > 0.5 && first.point()[0] <= 0.7 + 1e-9);
        assert!(r
            .violations
            .iter()
            .any(|v| (v.point()[0] - 0.6).abs() < 1e-9));
    }

    #[test]
    fn selector_outside_target_is_condition_one() {
        let y = Zone::interval(0.0, 1.0);
        let z = Zone::interval(0.0, 0.5);
        let phi = Zone::interval(0.0, 1.0);
        let r = check_compat(
            &y,
            &[CompatTarget {
                label: "z".into(),
                region: &z,
                phi: &phi,
            }],
            &grid1(0.0, 1.0, 0.1),
        )
        .unwrap();
        assert!(matches!(
            r.violations[0],
            CompatViolation::SelectorOutsideTarget { ref target, .. } if target == "z"
        ));
    }

    fn chain(n: usize) -> (Vec<Triple<f64>>, Strategy<f64>) {
        // Triples (M,0)..(M,n-1) on the line; (M,i) ends in [i+1, i+2).
        let mut triples = Vec::new();
        let mut strategy = Strategy::default();
        for i in 0..n {
            let lo = i as f64;
            triples.push(Triple {
                id: tid("M", i as u32),
                pre: Zone::interval(lo, lo + 1.0),
                orders: Default::default(),
                post: Zone::interval(lo + 1.0, lo + 1.0),
                is_start: i == 0,
                is_end: i + 1 == n,
            });
            if i + 1 < n {
                strategy.add(
                    tid("M", i as u32),
                    SelectionFunction {
                        target: tid("M", i as u32 + 1),
                        zone: Zone::interval(lo + 1.0, lo + 2.0),
                    },
                );
            }
        }
        (triples, strategy)
    }

    #[test]
    fn chain_is_complete_and_verified() {
        let (triples, strategy) = chain(4);
        let sampler = Sampler::uniform(grid1(-1.0, 6.0, 0.05));
        let reg = TransitionRegistry::shared();
        let g = build_strategy_graph(&strategy, &triples, &reg, &sampler).unwrap();
        assert_eq!(g.edge_count(), 3);
        let r = verify_strategy(&g).unwrap();
        assert!(r.verified);
        assert_eq!(r.vertices_visited, 4);
    }

    #[test]
    fn empty_choice_set_is_incomplete() {
        let (triples, mut strategy) = chain(3);
        strategy.remove_edge(&tid("M", 1), &tid("M", 2));
        let sampler = Sampler::uniform(grid1(-1.0, 6.0, 0.05));
        let reg = TransitionRegistry::shared();
        let r = completeness_at(&strategy, &triples, &reg, &sampler, &tid("M", 1)).unwrap();
        assert!(!r.compatible);
        let end = completeness_at(&strategy, &triples, &reg, &sampler, &tid("M", 2)).unwrap();
        assert!(end.compatible && end.vacuous);
        let g = build_strategy_graph(&strategy, &triples, &reg, &sampler).unwrap();
        let v = verify_strategy(&g).unwrap();
        assert_eq!(
            v.counterexample,
            Some(Counterexample::DeadEnd {
                path: vec![tid("M", 0), tid("M", 1)]
            })
        );
    }

    #[test]
    fn empty_strategy_gives_isolated_vertices() {
        let (triples, _) = chain(3);
        let sampler = Sampler::uniform(grid1(-1.0, 6.0, 0.5));
        let g = build_strategy_graph(&Strategy::default(), &triples, &TransitionRegistry::shared(), &sampler)
            .unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn missing_transition_is_an_error() {
        let (mut triples, mut strategy) = chain(2);
        triples[1].id = tid("N", 0);
        strategy.choices.clear();
        strategy.add(
            tid("M", 0),
            SelectionFunction {
                target: tid("N", 0),
                zone: Zone::interval(1.0, 2.0),
            },
        );
        let reg = TransitionRegistry {
            maps: vec![],
            shared_coordinates: false,
        };
        let sampler = Sampler::uniform(grid1(-1.0, 6.0, 0.5));
        let err = completeness_at(&strategy, &triples, &reg, &sampler, &tid("M", 0)).unwrap_err();
        assert!(matches!(err, VerifyError::Mode(ModeError::MissingTransition { .. })));
    }

    #[test]
    fn pullback_uses_the_transition_map() {
        let map = TransitionMap {
            from: "a".into(),
            to: "b".into(),
            map: CoordMap::Affine {
                scale: vec![2.0],
                offset: vec![0.0],
            },
            domain: Zone::interval(0.0, 10.0),
        };
        let pre = Zone::interval(4.0, 6.0);
        let pb = Pullback { map: &map, zone: &pre };
        assert!(pb.contains(&[2.5]).unwrap());
        assert!(!pb.contains(&[4.0]).unwrap());
        assert!(!pb.contains(&[-1.0]).unwrap());
    }

    fn ids(n: usize) -> Vec<TripleId> {
        (0..n).map(|i| tid("V", i as u32)).collect()
    }

    #[test]
    fn two_vertex_cycle_is_reported() {
        // start -> a -> b -> a
        let g = StrategyGraph::from_edges(ids(3), &[0], &[], vec![vec![1], vec![2], vec![1]]);
        let r = verify_strategy(&g).unwrap();
        assert!(!r.verified);
        assert_eq!(
            r.counterexample,
            Some(Counterexample::Cycle {
                prefix: vec![tid("V", 0)],
                cycle: vec![tid("V", 1), tid("V", 2), tid("V", 1)],
            })
        );
    }

    #[test]
    fn cycle_with_exit_still_fails() {
        let g = StrategyGraph::from_edges(ids(4), &[0], &[3], vec![vec![1], vec![2, 3], vec![1], vec![]]);
        assert!(!verify_strategy(&g).unwrap().verified);
    }

    #[test]
    fn no_start_is_an_error() {
        let g = StrategyGraph::from_edges(ids(2), &[], &[1], vec![vec![1], vec![]]);
        assert!(matches!(verify_strategy(&g), Err(VerifyError::NoStart)));
    }

    #[test]
    fn diamond_is_verified_and_dot_lists_edges() {
        let g = StrategyGraph::from_edges(ids(4), &[0], &[3], vec![vec![1, 2], vec![3], vec![3], vec![]]);
        assert!(verify_strategy(&g).unwrap().verified);
        let dot = g.to_dot();
        assert_eq!(dot.matches("->").count(), 4);
        assert!(dot.contains("(V,3)"));
    }

    fn unit_drift() -> ModelSpec<f64> {
        ModelSpec::new(VectorField::new(1, |_, _| vec![1.0]).with_lipschitz(0.0), 0.01)
    }

    fn still() -> ControlPoint<f64> {
        ControlPoint::new(StatePoint::zeros(1), vec![])
    }

    #[test]
    fn static_model_flags_only_near_boundary() {
        let model = ModelSpec::new(VectorField::zero(1), 0.1);
        let chart = Zone::interval(0.0, 10.0);
        let p = BadSetParams {
            lambda: 1.0,
            epsilon: 0.5,
            eta: 0.5,
            random_starts: 4,
        };
        let bad = compute_bad_set(&model, &still(), &chart, p, &grid1(0.0, 10.0, 0.25), 3).unwrap();
        for (pt, f) in bad.points.iter().zip(&bad.flags) {
            let interior = pt[0] > 1.0 - 1e-9 && pt[0] < 9.0 + 1e-9;
            assert_eq!(*f, !interior, "at {}", pt[0]);
        }
    }

    #[test]
    fn unit_drift_flags_the_far_band() {
        let chart = Zone::interval(0.0, 10.0);
        let (eps, eta) = (0.5, 0.25);
        let p = BadSetParams {
            lambda: 1.0,
            epsilon: eps,
            eta,
            random_starts: 8,
        };
        let bad = compute_bad_set(&unit_drift(), &still(), &chart, p, &grid1(0.0, 10.0, 0.125), 9).unwrap();
        let cut = 9.0 - (eps + eta);
        for (pt, f) in bad.points.iter().zip(&bad.flags) {
            if pt[0] > cut + 1e-9 {
                assert!(*f, "{} should be flagged", pt[0]);
            } else if pt[0] < cut - 1e-9 {
                assert!(!*f, "{} should be clear", pt[0]);
            }
        }
        let again = compute_bad_set(&unit_drift(), &still(), &chart, p, &grid1(0.0, 10.0, 0.125), 9).unwrap();
        assert_eq!(bad, again);
    }

    #[test]
    fn narrow_chart_flags_everything() {
        let chart = Zone::interval(0.0, 0.5);
        let p = BadSetParams {
            lambda: 1.0,
            epsilon: 0.01,
            eta: 0.01,
            random_starts: 0,
        };
        let bad = compute_bad_set(&unit_drift(), &still(), &chart, p, &grid1(0.0, 0.5, 0.05), 0).unwrap();
        assert!(bad.flags.iter().all(|f| *f));
    }

    #[test]
    fn effective_avoidance_algebra() {
        let chart = Zone::interval(0.0, 10.0);
        let avoid = Zone::interval(4.0, 5.0);
        let end = Zone::interval(9.5, 10.0);
        let p = BadSetParams {
            lambda: 1.0,
            epsilon: 0.5,
            eta: 0.25,
            random_starts: 0,
        };
        let bad = compute_bad_set(&unit_drift(), &still(), &chart, p, &grid1(0.0, 10.0, 0.125), 1).unwrap();
        let a = effective_avoidance(&avoid, &chart, &bad, &end);
        assert!(a.member(&[4.5]).unwrap());
        assert!(!a.member(&[6.0]).unwrap());
        assert!(a.member(&[8.5]).unwrap());
        assert!(a.member(&[9.2]).unwrap());
        assert!(!a.member(&[9.75]).unwrap());
        assert!(!a.member(&[11.0]).unwrap());

        let mut none = bad.clone();
        none.flags.iter_mut().for_each(|f| *f = false);
        assert_eq!(
            effective_avoidance(&avoid, &chart, &none, &end),
            Zone::intersection(vec![avoid.clone(), chart.clone()])
        );
        let inside_end = effective_avoidance(&avoid, &chart, &bad, &Zone::interval(-100.0, 100.0));
        for x in [6.0, 8.5, 9.2, 9.9] {
            assert!(!inside_end.member(&[x]).unwrap());
        }
    }

    #[test]
    fn overlap_lists_flagged_points_in_pre() {
        let chart = Zone::interval(0.0, 10.0);
        let p = BadSetParams {
            lambda: 1.0,
            epsilon: 0.5,
            eta: 0.25,
            random_starts: 0,
        };
        let bad = compute_bad_set(&unit_drift(), &still(), &chart, p, &grid1(0.0, 10.0, 0.5), 1).unwrap();
        assert!(bad_set_overlap(&Zone::interval(0.0, 5.0), &bad).unwrap().is_empty());
        assert!(!bad_set_overlap(&Zone::interval(8.0, 10.0), &bad).unwrap().is_empty());
    }
}
