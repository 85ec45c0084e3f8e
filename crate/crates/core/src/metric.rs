//! Points of the state space and the weighted Euclidean ruler used for
//! every error margin (measurement error, tube radius, zone clearance).

use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {what} has dimension {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("metric weight {index} must be positive")]
    NonPositiveWeight { index: usize },
    #[error("time {time} outside the covered interval [{start}, {end}]")]
    OutsideCoverage { time: f64, start: f64, end: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn check_dim(
    what: &'static str,
    expected: usize,
    found: usize,
) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::Dimension {
            what,
            expected,
            found,
        })
    }
}

/// A point of the state space `X` (or of a mode's digital state space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatePoint<T>(Vec<T>);

impl<T: Scalar> StatePoint<T> {
    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn new(coords: Vec<T>) -> Result<Self, GeometryError> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        Ok(Self(coords))
    }

    /// Skips the finiteness check; callers guarantee the invariant.
    pub(crate) fn from_vec_unchecked(coords: Vec<T>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![T::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl<T> Index<usize> for StatePoint<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for StatePoint<T> {
    type Error = GeometryError;

    fn try_from(v: Vec<T>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

/// Constant diagonal metric `d(a,b) = sqrt(sum w_i (a_i - b_i)^2)`.
///
/// Weights rescale axes of different physical type (positions, speeds,
/// fuel) onto a common ruler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec<T> {
    weights: Vec<T>,
}

impl<T: Scalar> MetricSpec<T> {
    pub fn new(weights: Vec<T>) -> Result<Self, GeometryError> {
        if weights.is_empty() {
            return Err(GeometryError::Invalid("metric needs at least one axis".into()));
        }
        if let Some(index) = weights.iter().position(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(GeometryError::NonPositiveWeight { index });
        }
        Ok(Self { weights })
    }

    /// Plain Euclidean metric.
    pub fn euclidean(dim: usize) -> Self {
        Self {
            weights: vec![T::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn min_weight(&self) -> T {
        self.weights.iter().copied().fold(T::infinity(), T::min)
    }

    /// Distance between raw coordinate slices; both must match the metric.
    pub fn dist(&self, a: &[T], b: &[T]) -> Result<T, GeometryError> {
        check_dim("first point", self.dim(), a.len())?;
        check_dim("second point", self.dim(), b.len())?;
        Ok(self.dist_unchecked(a, b))
    }

    pub(crate) fn dist_unchecked(&self, a: &[T], b: &[T]) -> T {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| *w * (*x - *y) * (*x - *y))
            .sum::<T>()
            .sqrt()
    }

    /// Length of a displacement vector.
    pub fn norm(&self, v: &[T]) -> T {
        self.weights
            .iter()
            .zip(v)
            .map(|(w, x)| *w * *x * *x)
            .sum::<T>()
            .sqrt()
    }
}

/// Distance between two points under `m`.
pub fn distance<T: Scalar>(
    a: &StatePoint<T>,
    b: &StatePoint<T>,
    m: &MetricSpec<T>,
) -> Result<T, GeometryError> {
    m.dist(a.coords(), b.coords())
}
