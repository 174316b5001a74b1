//! Selectors: single-valued choices from set values.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{check_dim, Result};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SetValuedMap};

pub type CustomSelector<T> = Arc<dyn Fn(&ConvexSet<T>, &[T]) -> Vec<T> + Send + Sync>;

#[derive(Clone)]
pub enum SelectorStrategy<T> {
    /// Minimum Euclidean norm element (unique by convexity).
    LeastNorm,
    /// Maximizer of `direction^T v`.
    ExtremeVertex(Vec<T>),
    /// Uniformly chosen vertex; consumes exactly one uniform draw.
    UniformVertex,
    Midpoint,
    /// Arbitrary rule `(set, x) ↦ v`. The caller guarantees `v ∈ set`.
    Custom(CustomSelector<T>),
}

impl<T> Default for SelectorStrategy<T> {
    fn default() -> Self {
        Self::LeastNorm
    }
}

impl<T: fmt::Debug> fmt::Debug for SelectorStrategy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LeastNorm => write!(f, "LeastNorm"),
            Self::ExtremeVertex(d) => write!(f, "ExtremeVertex({d:?})"),
            Self::UniformVertex => write!(f, "UniformVertex"),
            Self::Midpoint => write!(f, "Midpoint"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl<T: Scalar> SelectorStrategy<T> {
    /// Chooses an element of `set`; `x` is the state the set belongs to.
    pub fn choose(&self, set: &ConvexSet<T>, x: &[T], rng: &mut dyn RngCore) -> Result<Vec<T>> {
        match self {
            Self::LeastNorm => set.least_norm(),
            Self::ExtremeVertex(p) => set.support_point(p),
            Self::UniformVertex => {
                let n = set.vertex_count().max(1);
                let u = T::unit_uniform(rng).as_f64();
                let idx = ((u * n as f64) as usize).min(n - 1);
                Ok(set.vertex_at(idx))
            }
            Self::Midpoint => Ok(set.midpoint()),
            Self::Custom(rule) => {
                let v = rule(set, x);
                check_dim(set.dim(), v.len())?;
                Ok(v)
            }
        }
    }
}

/// `strategy` applied to `map(x)`.
pub fn select<T: Scalar>(
    map: &SetValuedMap<T>,
    x: &[T],
    strategy: &SelectorStrategy<T>,
    rng: &mut dyn RngCore,
) -> Result<Vec<T>> {
    let set = map.evaluate(x)?;
    strategy.choose(&set, x, rng)
}
