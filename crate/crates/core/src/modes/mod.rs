//! Modes, triples and strategies.
//!
//! Each mode `α` has its own digital state `State_α`, reached from a
//! measurement through a coordinate map and from other modes through
//! transition maps `τ_βα`. A triple `(α, i)` is a precondition, an orders
//! program and a postcondition, all stated in `State_α`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::GeometryError;
use crate::oracle::OracleError;
use crate::scalar::Scalar;
use crate::zone::Zone;

pub mod orders;
pub mod runtime;

pub use orders::{Action, Command, Condition, OrdersProgram};
pub use runtime::{
    audit_encapsulation, transfer_control, AuditFinding, Controller, ModeRuntime, RuntimeSetup,
    StepOutcome, TransferOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("state {state:?} outside the domain of tau({to}<-{from}): {domain}")]
    OutsideDomain {
        from: String,
        to: String,
        domain: String,
        state: Vec<f64>,
    },
    #[error("no transition map from mode {from} to mode {to}")]
    MissingTransition { from: String, to: String },
    #[error("unknown triple {0}")]
    UnknownTriple(TripleId),
    #[error("unknown mode {0}")]
    UnknownMode(String),
    #[error("mode {mode} has no field {field:?}")]
    UnknownField { mode: String, field: String },
    #[error("invalid triple id {0:?}; expected (Mode,index)")]
    BadId(String),
    #[error("orders: {0}")]
    Orders(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `(α, i)`, written `(Str,2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TripleId {
    pub mode: String,
    pub index: u32,
}

impl TripleId {
    pub fn new(mode: &str, index: u32) -> Self {
        Self {
            mode: mode.to_string(),
            index,
        }
    }
}

impl fmt::Display for TripleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.mode, self.index)
    }
}

impl FromStr for TripleId {
    type Err = ModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (mode, index) = inner.rsplit_once(',').ok_or_else(|| ModeError::BadId(s.into()))?;
        let index = index.trim().parse().map_err(|_| ModeError::BadId(s.into()))?;
        let mode = mode.trim();
        if mode.is_empty() {
            return Err(ModeError::BadId(s.into()));
        }
        Ok(Self::new(mode, index))
    }
}

impl TryFrom<String> for TripleId {
    type Error = ModeError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TripleId> for String {
    fn from(id: TripleId) -> Self {
        id.to_string()
    }
}

/// Coordinate change between state spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordMap<T> {
    Identity,
    /// `y_i = x[order[i]]`.
    Permute { order: Vec<usize> },
    /// `y_i = scale_i x_i + offset_i`.
    Affine { scale: Vec<T>, offset: Vec<T> },
}

impl<T: Scalar> CoordMap<T> {
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, GeometryError> {
        match self {
            CoordMap::Identity => Ok(x.to_vec()),
            CoordMap::Permute { order } => order
                .iter()
                .map(|i| {
                    x.get(*i).copied().ok_or(GeometryError::Dimension {
                        what: "permuted state",
                        expected: *i + 1,
                        found: x.len(),
                    })
                })
                .collect(),
            CoordMap::Affine { scale, offset } => {
                crate::metric::check_dim("affine input", scale.len(), x.len())?;
                crate::metric::check_dim("affine offset", scale.len(), offset.len())?;
                Ok((0..x.len()).map(|i| scale[i] * x[i] + offset[i]).collect())
            }
        }
    }

    pub fn output_dim(&self, input: usize) -> usize {
        match self {
            CoordMap::Identity => input,
            CoordMap::Permute { order } => order.len(),
            CoordMap::Affine { scale, .. } => scale.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec<T> {
    pub id: String,
    /// Names of the `State_α` coordinates, used by orders conditions.
    pub fields: Vec<String>,
    /// Where in `X` the mode is valid, in `X` coordinates.
    pub chart: Zone<T>,
    pub to_mode_state: CoordMap<T>,
}

impl<T: Scalar> ModeSpec<T> {
    pub fn state_dimension(&self) -> usize {
        self.fields.len()
    }

    pub fn field_index(&self, name: &str) -> Result<usize, ModeError> {
        self.fields
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| ModeError::UnknownField {
                mode: self.id.clone(),
                field: name.to_string(),
            })
    }
}

/// `τ_βα : State_α → State_β`, defined on `domain ⊂ State_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMap<T> {
    pub from: String,
    pub to: String,
    pub map: CoordMap<T>,
    pub domain: Zone<T>,
}

impl<T: Scalar> TransitionMap<T> {
    pub fn identity(from: &str, to: &str) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            map: CoordMap::Identity,
            domain: Zone::complement(Zone::Empty),
        }
    }
}

pub fn mode_transition<T: Scalar>(tm: &TransitionMap<T>, x: &[T]) -> Result<Vec<T>, ModeError> {
    if !tm.domain.member(x)? {
        return Err(ModeError::OutsideDomain {
            from: tm.from.clone(),
            to: tm.to.clone(),
            domain: serde_json::to_string(&tm.domain).unwrap_or_else(|_| format!("{:?}", tm.domain)),
            state: x.iter().map(|v| v.as_f64()).collect(),
        });
    }
    Ok(tm.map.apply(x)?)
}

/// All `τ` maps of a scenario. With `shared_coordinates` every missing
/// pair is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRegistry<T> {
    #[serde(default)]
    pub maps: Vec<TransitionMap<T>>,
    #[serde(default)]
    pub shared_coordinates: bool,
}

impl<T: Scalar> TransitionRegistry<T> {
    pub fn shared() -> Self {
        Self {
            maps: Vec::new(),
            shared_coordinates: true,
        }
    }

    pub fn lookup(&self, from: &str, to: &str) -> Result<TransitionMap<T>, ModeError> {
        if let Some(m) = self.maps.iter().find(|m| m.from == from && m.to == to) {
            return Ok(m.clone());
        }
        if from == to || self.shared_coordinates {
            return Ok(TransitionMap::identity(from, to));
        }
        Err(ModeError::MissingTransition {
            from: from.into(),
            to: to.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple<T> {
    pub id: TripleId,
    pub pre: Zone<T>,
    #[serde(default)]
    pub orders: OrdersProgram<T>,
    pub post: Zone<T>,
    #[serde(default)]
    pub is_start: bool,
    #[serde(default)]
    pub is_end: bool,
}

/// `φ_(β,j)`: the characteristic function of a closed zone in `State_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFunction<T> {
    pub target: TripleId,
    pub zone: Zone<T>,
}

impl<T: Scalar> SelectionFunction<T> {
    pub fn evaluate(&self, x: &[T]) -> Result<bool, GeometryError> {
        self.zone.member(x)
    }
}

pub fn evaluate_selection<T: Scalar>(phi: &SelectionFunction<T>, x: &[T]) -> Result<bool, GeometryError> {
    phi.evaluate(x)
}

/// `C : T → PF(T)` with one selection function per chosen successor, in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Strategy<T> {
    pub choices: IndexMap<TripleId, Vec<SelectionFunction<T>>>,
}

impl<T: Scalar> Strategy<T> {
    pub fn successors(&self, id: &TripleId) -> &[SelectionFunction<T>] {
        self.choices.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn add(&mut self, from: TripleId, phi: SelectionFunction<T>) {
        self.choices.entry(from).or_default().push(phi);
    }

    /// Drops the edge `from → to`; returns whether it existed.
    pub fn remove_edge(&mut self, from: &TripleId, to: &TripleId) -> bool {
        match self.choices.get_mut(from) {
            Some(v) => {
                let before = v.len();
                v.retain(|s| &s.target != to);
                v.len() != before
            }
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_print_and_parse() {
        let id = TripleId::new("Ch.rt", 2);
        assert_eq!(id.to_string(), "(Ch.rt,2)");
        assert_eq!("(Ch.rt,2)".parse::<TripleId>().unwrap(), id);
        assert_eq!("Ch.rt, 2".parse::<TripleId>().unwrap(), id);
        assert!("Str".parse::<TripleId>().is_err());
        assert!("(,1)".parse::<TripleId>().is_err());
        let json = serde_json::to_string(&id).unwrap();
        assert_eq!(json, "\"(Ch.rt,2)\"");
    }

    #[test]
    fn identity_transition_on_shared_coordinates() {
        let reg = TransitionRegistry::<f64>::shared();
        let tm = reg.lookup("Str", "Ch.rt").unwrap();
        let x = [1505.0, 110.0, 900.0, 95.0];
        assert_eq!(mode_transition(&tm, &x).unwrap(), x.to_vec());
    }

    #[test]
    fn composition_of_identities() {
        let reg = TransitionRegistry::<f64>::shared();
        let x = [3.0, 4.0];
        let ab = mode_transition(&reg.lookup("a", "b").unwrap(), &x).unwrap();
        let bc = mode_transition(&reg.lookup("b", "c").unwrap(), &ab).unwrap();
        let ac = mode_transition(&reg.lookup("a", "c").unwrap(), &x).unwrap();
        assert_eq!(bc, ac);
    }

    #[test]
    fn affine_composition_matches_direct() {
        let ab = TransitionMap {
            from: "a".into(),
            to: "b".into(),
            map: CoordMap::Affine { scale: vec![2.0], offset: vec![1.0] },
            domain: Zone::interval(-10.0, 10.0),
        };
        let bc = TransitionMap {
            from: "b".into(),
            to: "c".into(),
            map: CoordMap::Affine { scale: vec![0.5], offset: vec![-3.0] },
            domain: Zone::interval(-100.0, 100.0),
        };
        let ac = CoordMap::Affine { scale: vec![1.0], offset: vec![-2.5] };
        for x in [-4.0f64, 0.0, 7.5] {
            let two = mode_transition(&bc, &mode_transition(&ab, &[x]).unwrap()).unwrap();
            assert!((two[0] - ac.apply(&[x]).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_domain_names_zone() {
        let tm = TransitionMap {
            from: "a".into(),
            to: "b".into(),
            map: CoordMap::Identity,
            domain: Zone::interval(0.0, 1.0),
        };
        let err = mode_transition(&tm, &[2.0]).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("box") && text.contains("tau(b<-a)"), "{text}");
    }

    #[test]
    fn missing_transition_is_an_error() {
        let reg = TransitionRegistry::<f64> {
            maps: vec![],
            shared_coordinates: false,
        };
        assert!(matches!(reg.lookup("a", "b"), Err(ModeError::MissingTransition { .. })));
        assert!(reg.lookup("a", "a").is_ok());
    }

    #[test]
    fn permutation_swaps_cars() {
        let m = CoordMap::<f64>::Permute { order: vec![2, 3, 0, 1] };
        assert_eq!(m.apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![3.0, 4.0, 1.0, 2.0]);
        assert!(m.apply(&[1.0]).is_err());
    }

    #[test]
    fn strategy_keeps_declaration_order() {
        let mut s = Strategy::<f64>::default();
        let from = TripleId::new("Str", 2);
        for (m, i) in [("Ch.rt", 1), ("Ch.gw", 1), ("Ch.rt", 2)] {
            s.add(from.clone(), SelectionFunction { target: TripleId::new(m, i), zone: Zone::Empty });
        }
        let order: Vec<String> = s.successors(&from).iter().map(|p| p.target.to_string()).collect();
        assert_eq!(order, ["(Ch.rt,1)", "(Ch.gw,1)", "(Ch.rt,2)"]);
        assert!(s.remove_edge(&from, &TripleId::new("Ch.gw", 1)));
        assert!(!s.remove_edge(&from, &TripleId::new("Ch.gw", 1)));
        assert_eq!(s.successors(&TripleId::new("End", 1)).len(), 0);
    }
}
