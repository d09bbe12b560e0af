//! Feature vectors and the similarity / pooling functions applied to them.

use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense, finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; dim])
    }

    /// Standard basis vector `e_index` in `dim` dimensions.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut v = alloc::vec![0.0; dim];
        v[index] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    /// Returns `v / ||v||`.
    pub fn normalized(&self) -> Result<Self> {
        normalize(self)
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn normalize(v: &FeatureVector) -> Result<FeatureVector> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(FeatureVector(v.0.iter().map(|x| x / n).collect()))
}

/// Cosine of the angle between two equal-length slices; `ZeroVector` if either is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot(a, b) / (na * nb))
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// The S-cell response `f(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Similarity {
    /// `(x . t) / ||x||`
    #[default]
    NormalizedDot,
    /// `logistic(gain * x . t)`
    SigmoidDot { gain: f64 },
}

impl Similarity {
    pub const fn sigmoid() -> Self {
        Similarity::SigmoidDot { gain: 1.0 }
    }

    /// Maps a cosine estimate `c ~ (x . t) / ||x||` for unit `t` to the response.
    ///
    /// Approximate backends only produce the cosine, so the sigmoid variant
    /// rescales by `||x||` to recover the raw dot product.
    #[inline]
    pub fn from_cosine(self, cosine: f64, x_norm: f64) -> f64 {
        match self {
            Similarity::NormalizedDot => cosine,
            Similarity::SigmoidDot { gain } => logistic(gain * cosine * x_norm),
        }
    }
}

/// `f(x, t)` for nonzero `x` and unit-norm `t`.
pub fn similarity(x: &FeatureVector, t: &FeatureVector, kind: Similarity) -> Result<f64> {
    check_dim(x.dim(), t.dim())?;
    let n = x.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let d = dot(x, t);
    Ok(match kind {
        Similarity::NormalizedDot => d / n,
        Similarity::SigmoidDot { gain } => logistic(gain * d),
    })
}

/// The C-cell pooling function `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    Max,
    Sum,
}

impl Pooling {
    /// Pools a non-empty multiset of responses. Returns `None` when empty.
    pub fn pool<I: IntoIterator<Item = f64>>(self, values: I) -> Option<f64> {
        let mut it = values.into_iter();
        let first = it.next()?;
        Some(match self {
            Pooling::Max => it.fold(first, f64::max),
            Pooling::Sum => it.fold(first, |acc, v| acc + v),
        })
    }
}
