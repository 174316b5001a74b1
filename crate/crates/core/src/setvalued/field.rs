//! Piecewise-smooth vector fields and their Krasovskii regularization.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SetValuedMap, Surface};

pub type PieceClassifier<T> = Arc<dyn Fn(&[T]) -> Option<usize> + Send + Sync>;
pub type PieceFormula<T> = Arc<dyn Fn(usize, &[T]) -> Vec<T> + Send + Sync>;

/// Vector field that is smooth on finitely many open pieces separated by
/// declared hyperplanes.
///
/// `classify` returns the piece containing a point off the discontinuity
/// locus; `formula(piece, x)` must extend continuously to the closure of the
/// piece, since the Krasovskii hull evaluates it on the boundary.
#[derive(Clone)]
pub struct PiecewiseField<T> {
    dim: usize,
    out_dim: usize,
    classify: PieceClassifier<T>,
    formula: PieceFormula<T>,
    surfaces: Vec<Surface<T>>,
}

impl<T> fmt::Debug for PiecewiseField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseField")
            .field("dim", &self.dim)
            .field("out_dim", &self.out_dim)
            .field("surfaces", &self.surfaces.len())
            .finish()
    }
}

type Piece<T> = (
    Arc<dyn Fn(&[T]) -> bool + Send + Sync>,
    Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>,
);

impl<T: Scalar> PiecewiseField<T> {
    pub fn new(
        dim: usize,
        out_dim: usize,
        surfaces: Vec<Surface<T>>,
        classify: impl Fn(&[T]) -> Option<usize> + Send + Sync + 'static,
        formula: impl Fn(usize, &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            out_dim,
            classify: Arc::new(classify),
            formula: Arc::new(formula),
            surfaces,
        }
    }

    /// Field given as an explicit list of `(open region, formula)` pieces.
    pub fn from_pieces(dim: usize, out_dim: usize, surfaces: Vec<Surface<T>>, pieces: Vec<Piece<T>>) -> Self {
        let preds: Vec<_> = pieces.iter().map(|p| p.0.clone()).collect();
        let forms: Vec<_> = pieces.into_iter().map(|p| p.1).collect();
        Self::new(
            dim,
            out_dim,
            surfaces,
            move |x| preds.iter().position(|p| p(x)),
            move |i, x| forms[i](x),
        )
    }

    /// Continuous field: a single piece and no surfaces.
    pub fn continuous(dim: usize, out_dim: usize, f: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self::new(dim, out_dim, Vec::new(), |_| Some(0), move |_, x| f(x))
    }

    /// `x ↦ -sign(x)` in one dimension.
    pub fn negative_sign() -> Self {
        Self::scaled_sign(-T::one())
    }

    /// `x ↦ k·sign(x)` componentwise, in one dimension.
    pub fn scaled_sign(k: T) -> Self {
        Self::new(
            1,
            1,
            vec![Surface::axis(1, 0, T::zero())],
            |x| {
                if x[0] > T::zero() {
                    Some(0)
                } else if x[0] < T::zero() {
                    Some(1)
                } else {
                    None
                }
            },
            move |i, _| vec![if i == 0 { k } else { -k }],
        )
    }

    /// `x ↦ (k·sign(x₁), …, k·sign(x_d))`, one piece per open orthant.
    pub fn componentwise_sign(dim: usize, k: T) -> Self {
        let surfaces = (0..dim).map(|i| Surface::axis(dim, i, T::zero())).collect();
        Self::new(
            dim,
            dim,
            surfaces,
            |x| {
                let mut code = 0usize;
                for (i, v) in x.iter().enumerate() {
                    if *v == T::zero() {
                        return None;
                    }
                    if *v < T::zero() {
                        code |= 1 << i;
                    }
                }
                Some(code)
            },
            move |code, x| {
                (0..x.len())
                    .map(|i| if (code >> i) & 1 == 0 { k } else { -k })
                    .collect()
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn surfaces(&self) -> &[Surface<T>] {
        &self.surfaces
    }

    pub fn piece(&self, x: &[T]) -> Option<usize> {
        (self.classify)(x)
    }

    /// Value of piece `i`'s formula (continuously extended) at `x`.
    pub fn piece_value(&self, i: usize, x: &[T]) -> Vec<T> {
        (self.formula)(i, x)
    }

    /// Field value at a point off the discontinuity locus.
    pub fn value(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, x.len())?;
        let i = self.piece(x).ok_or_else(|| {
            Error::UnsupportedGeometry(format!("{:?} lies on the discontinuity locus", as_f64(x)))
        })?;
        Ok(self.piece_value(i, x))
    }

    /// Krasovskii regularization `𝒦[f](x)`: hull of the one-sided limits of `f`
    /// at `x`, i.e. the hull of the formulas of all pieces whose closure
    /// contains `x`. Reduces to `{f(x)}` at points of continuity.
    pub fn krasovskii(&self, x: &[T]) -> Result<ConvexSet<T>> {
        let pieces = adjacent_pieces(self.dim, &self.surfaces, x, |y| self.piece(y))?;
        let values = pieces.into_iter().map(|i| self.piece_value(i, x)).collect();
        ConvexSet::hull(values)
    }

    /// Set-valued map `x ↦ 𝒦[f](x)`.
    pub fn krasovskii_map(&self, name: impl Into<String>, common_bound: T) -> SetValuedMap<T> {
        let field = self.clone();
        SetValuedMap::from_rule(name, self.dim, common_bound, move |x| field.krasovskii(x))
            .with_surfaces(self.surfaces.clone())
    }
}

/// Pieces adjacent to `x`: probes every sign pattern of the active surfaces.
pub(crate) fn adjacent_pieces<T: Scalar>(
    dim: usize,
    surfaces: &[Surface<T>],
    x: &[T],
    classify: impl Fn(&[T]) -> Option<usize>,
) -> Result<Vec<usize>> {
    check_dim(dim, x.len())?;
    let scale = T::one() + x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let probe = T::epsilon().sqrt() * scale;
    let tol = T::surface_tol();
    let active: Vec<&Surface<T>> = surfaces.iter().filter(|s| s.side(x, tol) == 0).collect();

    if active.is_empty() {
        let here = classify(x).ok_or_else(|| {
            Error::UnsupportedGeometry(format!(
                "{:?} is on a discontinuity that is not a declared surface",
                as_f64(x)
            ))
        })?;
        for i in 0..dim {
            for s in [T::one(), -T::one()] {
                let mut y = x.to_vec();
                y[i] += s * probe;
                if classify(&y) != Some(here) {
                    return Err(Error::UnsupportedGeometry(format!(
                        "piece changes near {:?} away from declared surfaces",
                        as_f64(x)
                    )));
                }
            }
        }
        return Ok(vec![here]);
    }

    if active.len() > 20 {
        return Err(Error::Unsupported("too many active surfaces".into()));
    }
    let units: Vec<Vec<T>> = active
        .iter()
        .map(|s| linalg::scale(T::one() / norm(&s.normal), &s.normal))
        .collect();
    let mut found: Vec<usize> = Vec::new();
    for mask in 0..(1usize << active.len()) {
        let mut y = x.to_vec();
        for (bit, u) in units.iter().enumerate() {
            let s = if (mask >> bit) & 1 == 1 { T::one() } else { -T::one() };
            linalg::axpy(s * probe, u, &mut y);
        }
        if let Some(i) = classify(&y) {
            if !found.contains(&i) {
                found.push(i);
            }
        }
    }
    if found.is_empty() {
        return Err(Error::UnsupportedGeometry(format!(
            "no piece found adjacent to {:?}",
            as_f64(x)
        )));
    }
    found.sort_unstable();
    Ok(found)
}

pub(crate) fn as_f64<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.as_f64()).collect()
}
