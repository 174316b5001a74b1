//! Locally Lipschitz, piecewise-smooth scalar functions.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;
use crate::setvalued::{adjacent_pieces, as_f64, ConvexSet, Surface};

type Classifier<T> = Arc<dyn Fn(&[T]) -> Option<usize> + Send + Sync>;
type ValueFn<T> = Arc<dyn Fn(usize, &[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(usize, &[T]) -> Vec<T> + Send + Sync>;

/// Scalar function that is smooth on finitely many pieces separated by
/// declared hyperplane kinks.
///
/// Piece formulas and gradients must extend continuously to the closure of
/// their piece. Regularity (in the Clarke sense) is declared, not derived;
/// [`Self::spot_check_regularity`] provides sampled evidence.
#[derive(Clone)]
pub struct PiecewiseSmoothScalarFn<T> {
    name: String,
    dim: usize,
    pieces: usize,
    classify: Classifier<T>,
    value: ValueFn<T>,
    grad: GradFn<T>,
    surfaces: Vec<Surface<T>>,
    regular: bool,
    lipschitz: Option<T>,
}

impl<T> fmt::Debug for PiecewiseSmoothScalarFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseSmoothScalarFn")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("pieces", &self.pieces)
            .field("regular", &self.regular)
            .finish()
    }
}

impl<T: Scalar> PiecewiseSmoothScalarFn<T> {
    /// General constructor. `classify` returns `None` on the kink locus and a
    /// piece index in `0..pieces` elsewhere.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        pieces: usize,
        surfaces: Vec<Surface<T>>,
        regular: bool,
        classify: impl Fn(&[T]) -> Option<usize> + Send + Sync + 'static,
        value: impl Fn(usize, &[T]) -> T + Send + Sync + 'static,
        grad: impl Fn(usize, &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            pieces,
            classify: Arc::new(classify),
            value: Arc::new(value),
            grad: Arc::new(grad),
            surfaces,
            regular,
            lipschitz: None,
        }
    }

    /// Continuously differentiable function (hence regular).
    pub fn smooth(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        grad: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, dim, 1, Vec::new(), true, |_| Some(0), move |_, x| value(x), move |_, x| grad(x))
    }

    /// `k·|x|²`.
    pub fn scaled_squared_norm(dim: usize, k: T) -> Self {
        Self::smooth(
            "k|x|^2",
            dim,
            move |x| k * dot(x, x),
            move |x| linalg::scale(T::lit(2.0) * k, x),
        )
    }

    /// `|x|²`.
    pub fn squared_norm(dim: usize) -> Self {
        let mut f = Self::scaled_squared_norm(dim, T::one());
        f.name = "|x|^2".into();
        f
    }

    /// `Σ xᵢ`.
    pub fn coordinate_sum(dim: usize) -> Self {
        let mut f = Self::smooth("sum x", dim, |x| x.iter().copied().sum(), move |_| vec![T::one(); dim]);
        f.lipschitz = Some(T::from_usize(dim).unwrap_or_else(T::one).sqrt());
        f
    }

    /// One-dimensional convex piecewise-linear function given by its
    /// breakpoints (increasing) and the slope on each of the
    /// `breaks.len() + 1` intervals, with value `value_at_first` at `breaks[0]`.
    pub fn piecewise_linear_1d(
        name: impl Into<String>,
        breaks: Vec<T>,
        slopes: Vec<T>,
        value_at_first: T,
    ) -> Result<Self> {
        if breaks.is_empty() || slopes.len() != breaks.len() + 1 {
            return Err(Error::InvalidParameter(
                "need at least one breakpoint and one slope per interval".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("breakpoints must increase".into()));
        }
        let convex = slopes.windows(2).all(|w| w[0] <= w[1]);
        // Value at each breakpoint.
        let mut at = vec![value_at_first];
        for i in 1..breaks.len() {
            let prev = at[i - 1];
            at.push(prev + slopes[i] * (breaks[i] - breaks[i - 1]));
        }
        let surfaces = breaks.iter().map(|&b| Surface::axis(1, 0, b)).collect();
        let lip = slopes.iter().fold(T::zero(), |m, s| m.max(s.abs()));
        let b1 = breaks.clone();
        let b2 = breaks.clone();
        let s1 = slopes.clone();
        let mut f = Self::new(
            name,
            1,
            slopes.len(),
            surfaces,
            convex,
            move |x| {
                let v = x[0];
                if b1.contains(&v) {
                    return None;
                }
                Some(b1.iter().filter(|&&b| b < v).count())
            },
            move |i, x| {
                // Piece i spans (b[i-1], b[i]); anchor at the nearest breakpoint.
                if i == 0 {
                    at[0] + s1[0] * (x[0] - b2[0])
                } else {
                    at[i - 1] + s1[i] * (x[0] - b2[i - 1])
                }
            },
            move |i, _| vec![slopes[i]],
        );
        f.lipschitz = Some(lip);
        Ok(f)
    }

    /// `|x|` in one dimension.
    pub fn abs_1d() -> Self {
        Self::piecewise_linear_1d("|x|", vec![T::zero()], vec![-T::one(), T::one()], T::zero())
            .expect("valid breakpoints")
    }

    /// `max{x, 0}` in one dimension.
    pub fn positive_part_1d() -> Self {
        Self::piecewise_linear_1d("max{x,0}", vec![T::zero()], vec![T::zero(), T::one()], T::zero())
            .expect("valid breakpoints")
    }

    /// `x ↦ Σᵢ fᵢ(xᵢ)` for one-dimensional terms `fᵢ`.
    pub fn separable(name: impl Into<String>, terms: Vec<Self>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.dim != 1) {
            return Err(Error::InvalidParameter(format!(
                "separable term {} is not one-dimensional",
                t.name
            )));
        }
        let dim = terms.len();
        let surfaces = terms
            .iter()
            .enumerate()
            .flat_map(|(i, t)| {
                t.surfaces
                    .iter()
                    .map(move |s| Surface::axis(dim, i, s.offset / s.normal[0]))
            })
            .collect();
        let regular = terms.iter().all(|t| t.regular);
        let pieces = terms.iter().map(|t| t.pieces).product();
        let lipschitz = terms
            .iter()
            .map(|t| t.lipschitz)
            .try_fold(T::zero(), |acc, l| l.map(|l| acc + l * l))
            .map(T::sqrt);
        let radix: Vec<usize> = terms.iter().map(|t| t.pieces).collect();
        let (t1, t2, t3) = (terms.clone(), terms.clone(), terms);
        let r1 = radix.clone();
        let mut f = Self::new(
            name,
            dim,
            pieces,
            surfaces,
            regular,
            move |x| {
                let mut idx = 0;
                let mut mul = 1;
                for (j, t) in t1.iter().enumerate() {
                    idx += mul * t.piece(&x[j..=j])?;
                    mul *= r1[j];
                }
                Some(idx)
            },
            {
                let r = radix.clone();
                move |i, x| {
                    let mut rest = i;
                    let mut acc = T::zero();
                    for (j, t) in t2.iter().enumerate() {
                        acc += t.piece_value(rest % r[j], &x[j..=j]);
                        rest /= r[j];
                    }
                    acc
                }
            },
            move |i, x| {
                let mut rest = i;
                t3.iter()
                    .enumerate()
                    .map(|(j, t)| {
                        let g = t.piece_grad(rest % radix[j], &x[j..=j])[0];
                        rest /= radix[j];
                        g
                    })
                    .collect()
            },
        );
        f.lipschitz = lipschitz;
        Ok(f)
    }

    pub fn with_lipschitz(mut self, l: T) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    pub fn lipschitz(&self) -> Option<T> {
        self.lipschitz
    }

    pub fn surfaces(&self) -> &[Surface<T>] {
        &self.surfaces
    }

    pub fn piece(&self, x: &[T]) -> Option<usize> {
        (self.classify)(x)
    }

    pub fn piece_value(&self, i: usize, x: &[T]) -> T {
        (self.value)(i, x)
    }

    pub fn piece_grad(&self, i: usize, x: &[T]) -> Vec<T> {
        (self.grad)(i, x)
    }

    /// Pieces whose closure contains `x`.
    pub fn adjacent(&self, x: &[T]) -> Result<Vec<usize>> {
        adjacent_pieces(self.dim, &self.surfaces, x, |y| self.piece(y))
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        check_dim(self.dim, x.len())?;
        match self.piece(x) {
            Some(i) => Ok(self.piece_value(i, x)),
            None => Ok(self.piece_value(self.adjacent(x)?[0], x)),
        }
    }

    /// Classical gradient; errors on the kink locus.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, x.len())?;
        let i = self.piece(x).ok_or_else(|| {
            Error::UnsupportedGeometry(format!("{:?} lies on the kink locus", as_f64(x)))
        })?;
        Ok(self.piece_grad(i, x))
    }

    /// Clarke gradient: hull of the gradient limits of the adjacent pieces.
    pub fn clarke_gradient(&self, x: &[T]) -> Result<ConvexSet<T>> {
        let grads = self
            .adjacent(x)?
            .into_iter()
            .map(|i| self.piece_grad(i, x))
            .collect();
        ConvexSet::hull(grads)
    }

    /// Largest deviation `|∇f − central difference|` over `points` off the kink
    /// locus (points on the locus or with a stencil crossing it are skipped).
    pub fn check_gradient(&self, points: &[Vec<T>], h: T) -> Result<T> {
        let mut worst = T::zero();
        for x in points {
            let Some(i) = self.piece(x) else { continue };
            let g = self.piece_grad(i, x);
            for k in 0..self.dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                if self.piece(&xp) != Some(i) || self.piece(&xm) != Some(i) {
                    continue;
                }
                let fd = (self.piece_value(i, &xp) - self.piece_value(i, &xm)) / (T::lit(2.0) * h);
                worst = worst.max((fd - g[k]).abs());
            }
        }
        Ok(worst)
    }

    /// Checks the declared Lipschitz constant on `pairs` random pairs in the box.
    pub fn check_lipschitz(&self, lo: &[T], hi: &[T], pairs: usize, rng: &mut dyn RngCore) -> Result<bool> {
        let Some(l) = self.lipschitz else {
            return Err(Error::InvalidParameter(format!("{} has no declared Lipschitz constant", self.name)));
        };
        for _ in 0..pairs {
            let x = sample_box(lo, hi, rng);
            let y = sample_box(lo, hi, rng);
            let lhs = (self.value(&x)? - self.value(&y)?).abs();
            let rhs = l * linalg::dist(&x, &y);
            if lhs > rhs + T::membership_tol() * (T::one() + rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sampled evidence of Clarke regularity: compares the one-sided directional
    /// quotient `(f(x+tv) − f(x))/t` with `max_{p ∈ ∂f(x)} pᵀv` at `pairs`
    /// random `(x, v)`. Half of the points are snapped onto a random kink surface,
    /// where the two can actually differ.
    pub fn spot_check_regularity(
        &self,
        lo: &[T],
        hi: &[T],
        pairs: usize,
        step: T,
        tol: T,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        check_dim(self.dim, lo.len())?;
        check_dim(self.dim, hi.len())?;
        for k in 0..pairs {
            let mut x = sample_box(lo, hi, rng);
            if k % 2 == 1 && !self.surfaces.is_empty() {
                let s = &self.surfaces[rng.random_range(0..self.surfaces.len())];
                x = s.project(&x);
            }
            let mut v: Vec<T> = (0..self.dim).map(|_| T::standard_normal(rng)).collect();
            let nv = norm(&v);
            if nv == T::zero() {
                continue;
            }
            v = linalg::scale(T::one() / nv, &v);
            let mut xt = x.clone();
            linalg::axpy(step, &v, &mut xt);
            let quotient = (self.value(&xt)? - self.value(&x)?) / step;
            let general = self.clarke_gradient(&x)?.support(&v)?;
            if (quotient - general).abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub(crate) fn sample_box<T: Scalar>(lo: &[T], hi: &[T], rng: &mut dyn RngCore) -> Vec<T> {
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| l + (h - l) * T::unit_uniform(rng))
        .collect()
}
