//! Set-valued derivatives along set-valued maps.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, game_value};
use crate::lyapunov::PiecewiseSmoothScalarFn;
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SetValuedMap};

/// A derivative value that may be `−∞` (empty reduced inclusion).
///
/// `−∞` is a distinguished variant so it never leaks into float arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative<T> {
    Finite(T),
    NegInfinity,
}

impl<T: Scalar> Derivative<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Self::Finite(v) => Some(v),
            Self::NegInfinity => None,
        }
    }

    pub fn is_neg_infinity(self) -> bool {
        matches!(self, Self::NegInfinity)
    }

    /// `self ≤ bound + tol`; always true for `−∞`.
    pub fn at_most(self, bound: T, tol: T) -> bool {
        match self {
            Self::Finite(v) => v <= bound + tol,
            Self::NegInfinity => true,
        }
    }
}

impl<T: Scalar> fmt::Display for Derivative<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v:.16e}"),
            Self::NegInfinity => write!(f, "-inf"),
        }
    }
}

/// Value of the set-valued derivative: an interval of reals, possibly empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeSet<T> {
    Empty,
    Interval { lo: T, hi: T },
}

impl<T: Scalar> DerivativeSet<T> {
    pub fn is_empty(&self) -> bool {
        matches!(self, Self::Empty)
    }

    pub fn contains(&self, a: T, tol: T) -> bool {
        match *self {
            Self::Empty => false,
            Self::Interval { lo, hi } => a >= lo - tol && a <= hi + tol,
        }
    }
}

/// Clarke gradient `∂u(x)`.
pub fn clarke_gradient<T: Scalar>(u: &PiecewiseSmoothScalarFn<T>, x: &[T]) -> Result<ConvexSet<T>> {
    u.clarke_gradient(x)
}

/// Rows `p_j − p_0` whose common kernel expresses "`pᵀq` is constant over `∂u(x)`".
fn constancy_rows<T: Scalar>(grad: &ConvexSet<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let pts = grad.extreme_points()?;
    let p0 = pts[0].clone();
    let rows = pts[1..].iter().map(|p| linalg::sub(p, &p0)).collect();
    Ok((p0, rows))
}

fn kernel_tol<T: Scalar>() -> T {
    T::membership_tol()
}

/// `{q ∈ F(x) : pᵀq constant over p ∈ ∂u(x)}`, or `None` if empty.
pub fn constancy_subset<T: Scalar>(
    u: &PiecewiseSmoothScalarFn<T>,
    fx: &ConvexSet<T>,
    x: &[T],
) -> Result<Option<ConvexSet<T>>> {
    let grad = u.clarke_gradient(x)?;
    let (_, rows) = constancy_rows(&grad)?;
    if rows.is_empty() {
        return Ok(Some(fx.clone()));
    }
    fx.intersect_kernel(&rows, kernel_tol())
}

/// Set-valued derivative `{a : ∃q ∈ F(x), pᵀq = a ∀p ∈ ∂v(x)}` of a regular `v`.
///
/// Computed exactly: the admissible `q` form `F(x) ∩ ker`, whose image under
/// `p₀ᵀ·` is an interval.
pub fn set_valued_derivative<T: Scalar>(
    v: &PiecewiseSmoothScalarFn<T>,
    map: &SetValuedMap<T>,
    x: &[T],
) -> Result<DerivativeSet<T>> {
    if !v.is_regular() {
        return Err(Error::NotRegular(x.iter().map(|c| c.as_f64()).collect()));
    }
    let fx = map.evaluate(x)?;
    let grad = v.clarke_gradient(x)?;
    let (p0, rows) = constancy_rows(&grad)?;
    let admissible = if rows.is_empty() {
        Some(fx)
    } else {
        fx.intersect_kernel(&rows, kernel_tol())?
    };
    Ok(match admissible {
        None => DerivativeSet::Empty,
        Some(s) => DerivativeSet::Interval {
            lo: -s.support(&linalg::scale(-T::one(), &p0))?,
            hi: s.support(&p0)?,
        },
    })
}

/// `𝒰`-reduced inclusion `∩ᵢ M_{Uᵢ}^F(x)`; `F(x)` when `us` is empty.
pub fn u_reduced<T: Scalar>(
    map: &SetValuedMap<T>,
    us: &[PiecewiseSmoothScalarFn<T>],
    x: &[T],
) -> Result<Option<ConvexSet<T>>> {
    let fx = map.evaluate(x)?;
    // The constancy conditions are linear in q, so intersecting the M_{Uᵢ}
    // amounts to one kernel intersection with all rows stacked.
    let mut rows = Vec::new();
    for u in us {
        let grad = u.clarke_gradient(x)?;
        rows.extend(constancy_rows(&grad)?.1);
    }
    if rows.is_empty() {
        return Ok(Some(fx));
    }
    fx.intersect_kernel(&rows, kernel_tol())
}

/// `𝒰`-generalized derivative: `min_{p ∈ ∂V} max_{q ∈ F̃} pᵀq` for regular `V`,
/// `max_p max_q pᵀq` otherwise, and `−∞` when `F̃` is empty.
pub fn u_generalized_derivative<T: Scalar>(
    v: &PiecewiseSmoothScalarFn<T>,
    us: &[PiecewiseSmoothScalarFn<T>],
    map: &SetValuedMap<T>,
    x: &[T],
) -> Result<Derivative<T>> {
    let Some(reduced) = u_reduced(map, us, x)? else {
        return Ok(Derivative::NegInfinity);
    };
    let grad = v.clarke_gradient(x)?;
    let ps = grad.extreme_points()?;
    if !v.is_regular() {
        let mut best = T::neg_infinity();
        for p in &ps {
            best = best.max(reduced.support(p)?);
        }
        return Ok(Derivative::Finite(best));
    }
    if ps.len() == 1 {
        return Ok(Derivative::Finite(reduced.support(&ps[0])?));
    }
    // Bilinear min-max over two polytopes: value of the matrix game on vertices.
    let qs = reduced.extreme_points().map_err(|_| {
        Error::Unsupported("min-max over a non-polyhedral reduced set with a set-valued gradient".into())
    })?;
    let payoff: Vec<Vec<T>> = ps
        .iter()
        .map(|p| qs.iter().map(|q| dot(p, q)).collect())
        .collect();
    Ok(Derivative::Finite(game_value(&payoff)))
}
