//! Compact convex sets built from boxes, polytopes, balls, Minkowski sums and
//! nonnegative scalings.
//!
//! Every set in this algebra can be written exactly as `Q ⊕ r·B̄` where `Q` is a
//! polytope (kept as a box when possible) and `r ≥ 0`. Support functions are
//! evaluated on the expression tree directly; distance, projection and
//! least-norm queries go through that canonical form and are exact up to
//! floating point roundoff.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm, solve_dense};
use crate::scalar::Scalar;

/// Largest dimension for which box vertices are enumerated.
const MAX_BOX_ENUM_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Singleton(Vec<T>),
    Box { lo: Vec<T>, hi: Vec<T> },
    /// Convex hull of the listed vertices.
    Polytope(Vec<Vec<T>>),
    Ball { center: Vec<T>, radius: T },
    Sum(Box<ConvexSet<T>>, Box<ConvexSet<T>>),
    Scaled(T, Box<ConvexSet<T>>),
}

/// Nonempty compact convex subset of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet<T> {
    dim: usize,
    shape: Shape<T>,
}

impl<T: Scalar> ConvexSet<T> {
    pub fn singleton(point: Vec<T>) -> Self {
        Self {
            dim: point.len(),
            shape: Shape::Singleton(point),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::singleton(linalg::zeros(dim))
    }

    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidSet("box requires lo <= hi componentwise".into()));
        }
        Ok(Self {
            dim: lo.len(),
            shape: Shape::Box { lo, hi },
        })
    }

    /// `[lo, hi]` in one dimension.
    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::boxed(vec![lo], vec![hi])
    }

    pub fn polytope(vertices: Vec<Vec<T>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::InvalidSet("polytope requires at least one vertex".into()))?;
        let dim = first.len();
        for v in &vertices {
            check_dim(dim, v.len())?;
        }
        Ok(Self {
            dim,
            shape: Shape::Polytope(vertices),
        })
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) {
            return Err(Error::InvalidSet("ball radius must be nonnegative".into()));
        }
        Ok(Self {
            dim: center.len(),
            shape: Shape::Ball { center, radius },
        })
    }

    /// Smallest convenient representation of the hull of `points`:
    /// a singleton, an interval in one dimension, otherwise a polytope.
    pub fn hull(points: Vec<Vec<T>>) -> Result<Self> {
        let mut unique: Vec<Vec<T>> = Vec::with_capacity(points.len());
        for p in points {
            if !unique.iter().any(|u| u == &p) {
                unique.push(p);
            }
        }
        match unique.len() {
            0 => Err(Error::InvalidSet("hull of no points".into())),
            1 => Ok(Self::singleton(unique.pop().unwrap_or_default())),
            _ if unique[0].len() == 1 => {
                let lo = unique.iter().map(|p| p[0]).fold(T::infinity(), T::min);
                let hi = unique.iter().map(|p| p[0]).fold(T::neg_infinity(), T::max);
                Self::interval(lo, hi)
            }
            _ => Self::polytope(unique),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn minkowski_sum(&self, other: &ConvexSet<T>) -> Result<ConvexSet<T>> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            shape: Shape::Sum(Box::new(self.clone()), Box::new(other.clone())),
        })
    }

    /// Translate by `v`.
    pub fn shifted(&self, v: &[T]) -> Result<ConvexSet<T>> {
        self.minkowski_sum(&Self::singleton(v.to_vec()))
    }

    pub fn scale(&self, k: T) -> Result<ConvexSet<T>> {
        if !(k >= T::zero()) {
            return Err(Error::NegativeScale(k.as_f64()));
        }
        Ok(Self {
            dim: self.dim,
            shape: Shape::Scaled(k, Box::new(self.clone())),
        })
    }

    /// `σ(p, A) = sup { p^T a : a ∈ A }`.
    pub fn support(&self, p: &[T]) -> Result<T> {
        check_dim(self.dim, p.len())?;
        Ok(self.support_unchecked(p))
    }

    fn support_unchecked(&self, p: &[T]) -> T {
        match &self.shape {
            Shape::Singleton(a) => dot(p, a),
            Shape::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&pi, (&l, &h))| (pi * l).max(pi * h))
                .sum(),
            Shape::Polytope(vs) => vs
                .iter()
                .map(|v| dot(p, v))
                .fold(T::neg_infinity(), T::max),
            Shape::Ball { center, radius } => dot(p, center) + *radius * norm(p),
            Shape::Sum(a, b) => a.support_unchecked(p) + b.support_unchecked(p),
            Shape::Scaled(k, a) => *k * a.support_unchecked(p),
        }
    }

    /// A maximizer of `p^T a` over the set. Ties on a box coordinate with `p_i = 0` pick `hi`.
    pub fn support_point(&self, p: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, p.len())?;
        Ok(self.support_point_unchecked(p))
    }

    fn support_point_unchecked(&self, p: &[T]) -> Vec<T> {
        match &self.shape {
            Shape::Singleton(a) => a.clone(),
            Shape::Box { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&pi, (&l, &h))| if pi >= T::zero() { h } else { l })
                .collect(),
            Shape::Polytope(vs) => {
                let mut best = &vs[0];
                let mut best_val = dot(p, best);
                for v in &vs[1..] {
                    let val = dot(p, v);
                    if val > best_val {
                        best = v;
                        best_val = val;
                    }
                }
                best.clone()
            }
            Shape::Ball { center, radius } => {
                let n = norm(p);
                if n > T::zero() {
                    center
                        .iter()
                        .zip(p)
                        .map(|(&c, &pi)| c + *radius * pi / n)
                        .collect()
                } else {
                    center.clone()
                }
            }
            Shape::Sum(a, b) => {
                linalg::add(&a.support_point_unchecked(p), &b.support_point_unchecked(p))
            }
            Shape::Scaled(k, a) => linalg::scale(*k, &a.support_point_unchecked(p)),
        }
    }

    /// Canonical `Q ⊕ r·B̄` form.
    pub(crate) fn canonical(&self) -> Result<Canonical<T>> {
        Ok(match &self.shape {
            Shape::Singleton(a) => Canonical {
                core: Core::Points(vec![a.clone()]),
                radius: T::zero(),
            },
            Shape::Box { lo, hi } => Canonical {
                core: Core::Box {
                    lo: lo.clone(),
                    hi: hi.clone(),
                },
                radius: T::zero(),
            },
            Shape::Polytope(vs) => Canonical {
                core: Core::Points(vs.clone()),
                radius: T::zero(),
            },
            Shape::Ball { center, radius } => Canonical {
                core: Core::Points(vec![center.clone()]),
                radius: *radius,
            },
            Shape::Sum(a, b) => {
                let ca = a.canonical()?;
                let cb = b.canonical()?;
                Canonical {
                    core: ca.core.minkowski(&cb.core)?,
                    radius: ca.radius + cb.radius,
                }
            }
            Shape::Scaled(k, a) => {
                let ca = a.canonical()?;
                Canonical {
                    core: ca.core.scaled(*k),
                    radius: *k * ca.radius,
                }
            }
        })
    }

    /// Nearest point of the set to `z`.
    pub fn project(&self, z: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, z.len())?;
        Ok(self.canonical()?.project(z))
    }

    /// Euclidean distance from `z` to the set.
    pub fn distance(&self, z: &[T]) -> Result<T> {
        check_dim(self.dim, z.len())?;
        Ok(self.canonical()?.distance(z))
    }

    /// Minimum-norm element.
    pub fn least_norm(&self) -> Result<Vec<T>> {
        self.project(&linalg::zeros(self.dim))
    }

    /// Membership up to Euclidean tolerance `tol`.
    ///
    /// For boxes and singletons the test is exact. For polytope cores an
    /// additional allowance of a few ulps of the vertex scale absorbs roundoff
    /// in the min-norm solver, so `tol = 0` still accepts interior points.
    pub fn contains(&self, v: &[T], tol: T) -> Result<bool> {
        check_dim(self.dim, v.len())?;
        if !(tol >= T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be nonnegative".into()));
        }
        let c = self.canonical()?;
        let d = c.distance(v);
        Ok(d <= tol + c.roundoff(v))
    }

    /// Extreme-point description (a finite superset of the vertices). Fails for
    /// sets with a nondegenerate ball component.
    pub fn extreme_points(&self) -> Result<Vec<Vec<T>>> {
        let c = self.canonical()?;
        if c.radius > T::zero() {
            return Err(Error::Unsupported(
                "set with a ball component has no finite vertex description".into(),
            ));
        }
        c.core.points()
    }

    /// `true` when the canonical form has no ball component.
    pub fn is_polyhedral(&self) -> Result<bool> {
        Ok(self.canonical()?.radius == T::zero())
    }

    /// Directed distance `sup_{a ∈ self} dist(a, other)`.
    pub fn directed_distance(&self, other: &ConvexSet<T>, n_dirs: usize) -> Result<T> {
        check_dim(self.dim, other.dim)?;
        let ca = self.canonical()?;
        let cb = other.canonical()?;
        if ca.radius == T::zero() {
            let pts = ca.core.points()?;
            return Ok(pts
                .iter()
                .map(|p| cb.distance(p))
                .fold(T::zero(), T::max));
        }
        // sup_a dist(a, B) = max(0, sup_{|p|=1} σ_A(p) − σ_B(p)) for convex compact B.
        let dirs = direction_family::<T>(self.dim, n_dirs);
        Ok(dirs
            .iter()
            .map(|p| self.support_unchecked(p) - other.support_unchecked(p))
            .fold(T::zero(), T::max))
    }

    /// Set distance as the sum of both directed distances.
    pub fn hausdorff(&self, other: &ConvexSet<T>, n_dirs: usize) -> Result<T> {
        check_dim(self.dim, other.dim)?;
        if n_dirs < 2 * self.dim {
            return Err(Error::InvalidParameter(format!(
                "need at least {} directions, got {n_dirs}",
                2 * self.dim
            )));
        }
        Ok(self.directed_distance(other, n_dirs)? + other.directed_distance(self, n_dirs)?)
    }

    /// Intersection with the linear subspace `{q : r^T q = 0 for every row r}`.
    /// Returns `None` when the intersection is empty. Only polyhedral sets are supported.
    pub fn intersect_kernel(&self, rows: &[Vec<T>], tol: T) -> Result<Option<ConvexSet<T>>> {
        for r in rows {
            check_dim(self.dim, r.len())?;
        }
        let basis = orthonormal_rows(rows, tol);
        if basis.is_empty() {
            return Ok(Some(self.clone()));
        }
        let pts = self.extreme_points()?;
        let k = basis.len();
        let scale = pts
            .iter()
            .map(|p| norm(p))
            .fold(T::one(), T::max);
        let feas_tol = tol * scale;
        // Images of the vertices under the constraint map.
        let images: Vec<Vec<T>> = pts
            .iter()
            .map(|p| basis.iter().map(|r| dot(r, p)).collect())
            .collect();
        let mut found: Vec<Vec<T>> = Vec::new();
        let max_m = (k + 1).min(pts.len());
        for m in 1..=max_m {
            for subset in combinations(pts.len(), m) {
                let Some(lambda) = affine_kernel_weights(&images, &subset, feas_tol) else {
                    continue;
                };
                let mut q = linalg::zeros(self.dim);
                for (&j, &l) in subset.iter().zip(&lambda) {
                    linalg::axpy(l, &pts[j], &mut q);
                }
                if !found.iter().any(|f| linalg::dist(f, &q) <= feas_tol) {
                    found.push(q);
                }
            }
        }
        if found.is_empty() {
            Ok(None)
        } else {
            Ok(Some(ConvexSet::hull(found)?))
        }
    }

    /// Midpoint representative: box center, vertex centroid, ball center.
    pub fn midpoint(&self) -> Vec<T> {
        match &self.shape {
            Shape::Singleton(a) => a.clone(),
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| (l + h) / T::lit(2.0))
                .collect(),
            Shape::Polytope(vs) => {
                let mut c = linalg::zeros(self.dim);
                for v in vs {
                    linalg::axpy(T::one(), v, &mut c);
                }
                let n = T::from_usize(vs.len()).unwrap_or_else(T::one);
                linalg::scale(T::one() / n, &c)
            }
            Shape::Ball { center, .. } => center.clone(),
            Shape::Sum(a, b) => linalg::add(&a.midpoint(), &b.midpoint()),
            Shape::Scaled(k, a) => linalg::scale(*k, &a.midpoint()),
        }
    }

    /// Number of enumerable vertices and the vertex at `index` (mixed radix over
    /// the expression tree). Ball components contribute their center.
    pub(crate) fn vertex_count(&self) -> usize {
        match &self.shape {
            Shape::Singleton(_) | Shape::Ball { .. } => 1,
            Shape::Box { lo, hi } => {
                let free = lo.iter().zip(hi).filter(|(l, h)| l < h).count();
                1usize << free.min(MAX_BOX_ENUM_DIM)
            }
            Shape::Polytope(vs) => vs.len(),
            Shape::Sum(a, b) => a.vertex_count().saturating_mul(b.vertex_count()),
            Shape::Scaled(_, a) => a.vertex_count(),
        }
    }

    pub(crate) fn vertex_at(&self, index: usize) -> Vec<T> {
        match &self.shape {
            Shape::Singleton(a) => a.clone(),
            Shape::Ball { center, .. } => center.clone(),
            Shape::Box { lo, hi } => {
                let mut bit = 0;
                lo.iter()
                    .zip(hi)
                    .map(|(&l, &h)| {
                        if l < h && bit < MAX_BOX_ENUM_DIM {
                            let pick = (index >> bit) & 1 == 1;
                            bit += 1;
                            if pick {
                                h
                            } else {
                                l
                            }
                        } else {
                            l
                        }
                    })
                    .collect()
            }
            Shape::Polytope(vs) => vs[index % vs.len()].clone(),
            Shape::Sum(a, b) => {
                let na = a.vertex_count().max(1);
                linalg::add(&a.vertex_at(index % na), &b.vertex_at(index / na))
            }
            Shape::Scaled(k, a) => linalg::scale(*k, &a.vertex_at(index)),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Core<T> {
    Box { lo: Vec<T>, hi: Vec<T> },
    Points(Vec<Vec<T>>),
}

#[derive(Debug, Clone)]
pub(crate) struct Canonical<T> {
    pub core: Core<T>,
    pub radius: T,
}

impl<T: Scalar> Core<T> {
    fn points(&self) -> Result<Vec<Vec<T>>> {
        match self {
            Core::Points(p) => Ok(p.clone()),
            Core::Box { lo, hi } => box_vertices(lo, hi),
        }
    }

    fn minkowski(&self, other: &Core<T>) -> Result<Core<T>> {
        Ok(match (self, other) {
            (Core::Box { lo, hi }, Core::Box { lo: l2, hi: h2 }) => Core::Box {
                lo: linalg::add(lo, l2),
                hi: linalg::add(hi, h2),
            },
            (Core::Box { lo, hi }, Core::Points(p)) | (Core::Points(p), Core::Box { lo, hi })
                if p.len() == 1 =>
            {
                Core::Box {
                    lo: linalg::add(lo, &p[0]),
                    hi: linalg::add(hi, &p[0]),
                }
            }
            _ => {
                let a = self.points()?;
                let b = other.points()?;
                let mut out: Vec<Vec<T>> = Vec::with_capacity(a.len() * b.len());
                for x in &a {
                    for y in &b {
                        let s = linalg::add(x, y);
                        if !out.contains(&s) {
                            out.push(s);
                        }
                    }
                }
                Core::Points(out)
            }
        })
    }

    fn scaled(&self, k: T) -> Core<T> {
        match self {
            Core::Box { lo, hi } => Core::Box {
                lo: linalg::scale(k, lo),
                hi: linalg::scale(k, hi),
            },
            Core::Points(p) => Core::Points(p.iter().map(|v| linalg::scale(k, v)).collect()),
        }
    }

    fn project(&self, z: &[T]) -> Vec<T> {
        match self {
            Core::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&x, (&l, &h))| x.max(l).min(h))
                .collect(),
            Core::Points(p) => {
                if p.len() == 1 {
                    return p[0].clone();
                }
                let shifted: Vec<Vec<T>> = p.iter().map(|v| linalg::sub(v, z)).collect();
                linalg::add(&min_norm_point(&shifted), z)
            }
        }
    }
}

impl<T: Scalar> Canonical<T> {
    pub(crate) fn project(&self, z: &[T]) -> Vec<T> {
        let q = self.core.project(z);
        if self.radius == T::zero() {
            return q;
        }
        let gap = linalg::sub(z, &q);
        let g = norm(&gap);
        if g <= self.radius {
            z.to_vec()
        } else {
            q.iter()
                .zip(&gap)
                .map(|(&qi, &gi)| qi + self.radius * gi / g)
                .collect()
        }
    }

    pub(crate) fn distance(&self, z: &[T]) -> T {
        let q = self.core.project(z);
        (linalg::dist(z, &q) - self.radius).max(T::zero())
    }

    fn roundoff(&self, z: &[T]) -> T {
        match &self.core {
            Core::Box { .. } => T::zero(),
            Core::Points(p) if p.len() == 1 => T::zero(),
            Core::Points(p) => {
                let scale = p
                    .iter()
                    .map(|v| linalg::dist(v, z))
                    .fold(T::zero(), T::max);
                T::epsilon() * T::lit(256.0) * (T::one() + scale)
            }
        }
    }
}

fn box_vertices<T: Scalar>(lo: &[T], hi: &[T]) -> Result<Vec<Vec<T>>> {
    let free: Vec<usize> = (0..lo.len()).filter(|&i| lo[i] < hi[i]).collect();
    if free.len() > MAX_BOX_ENUM_DIM {
        return Err(Error::Unsupported(format!(
            "box with {} free coordinates is too large to enumerate",
            free.len()
        )));
    }
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0..(1usize << free.len()) {
        let mut v = lo.to_vec();
        for (bit, &i) in free.iter().enumerate() {
            if (mask >> bit) & 1 == 1 {
                v[i] = hi[i];
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Minimum-norm point of the convex hull of `pts` (Wolfe's algorithm).
pub(crate) fn min_norm_point<T: Scalar>(pts: &[Vec<T>]) -> Vec<T> {
    let Some(start) = (0..pts.len()).min_by(|&i, &j| {
        dot(&pts[i], &pts[i])
            .partial_cmp(&dot(&pts[j], &pts[j]))
            .unwrap_or(std::cmp::Ordering::Equal)
    }) else {
        return Vec::new();
    };
    let scale = pts
        .iter()
        .map(|p| dot(p, p))
        .fold(T::min_positive_value(), T::max);
    let tol = T::epsilon() * T::lit(16.0) * scale;
    let wtol = T::epsilon() * T::lit(16.0);
    let mut set = vec![start];
    let mut w = vec![T::one()];
    let mut x = pts[start].clone();

    for _major in 0..(10 * pts.len() + 100) {
        let (j, val) = pts
            .iter()
            .enumerate()
            .map(|(j, p)| (j, dot(&x, p)))
            .fold((0, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        if dot(&x, &x) - val <= tol || set.contains(&j) {
            break;
        }
        set.push(j);
        w.push(T::zero());
        loop {
            let Some(alpha) = affine_min_weights(pts, &set) else {
                // Affinely dependent support: drop the newest point and stop.
                set.pop();
                w.pop();
                return x;
            };
            if alpha.iter().all(|&a| a > wtol) {
                w = alpha;
                x = combine(pts, &set, &w);
                break;
            }
            let mut theta = T::one();
            for (&a, &wi) in alpha.iter().zip(&w) {
                if a <= wtol && wi - a > T::zero() {
                    theta = theta.min(wi / (wi - a));
                }
            }
            for (wi, &a) in w.iter_mut().zip(&alpha) {
                *wi = theta * a + (T::one() - theta) * *wi;
            }
            let mut k = 0;
            while k < set.len() {
                if w[k] <= wtol {
                    set.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            if set.is_empty() {
                set.push(j);
                w.push(T::one());
            }
            let total: T = w.iter().copied().sum();
            for wi in w.iter_mut() {
                *wi /= total;
            }
            x = combine(pts, &set, &w);
            if set.len() == 1 {
                break;
            }
        }
    }
    x
}

fn combine<T: Scalar>(pts: &[Vec<T>], set: &[usize], w: &[T]) -> Vec<T> {
    let mut x = linalg::zeros(pts[set[0]].len());
    for (&i, &wi) in set.iter().zip(w) {
        linalg::axpy(wi, &pts[i], &mut x);
    }
    x
}

/// Weights of the minimum-norm point of the affine hull of `pts[set]`.
fn affine_min_weights<T: Scalar>(pts: &[Vec<T>], set: &[usize]) -> Option<Vec<T>> {
    let m = set.len();
    let mut a = vec![vec![T::zero(); m + 1]; m + 1];
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[r][c] = dot(&pts[i], &pts[j]);
        }
        a[r][m] = T::one();
        a[m][r] = T::one();
    }
    let mut b = vec![T::zero(); m + 1];
    b[m] = T::one();
    let sol = solve_dense(a, b)?;
    Some(sol[..m].to_vec())
}

/// Convex weights `λ` on `subset` with `Σ λ = 1` and `Σ λ_j images_j = 0`, if unique and feasible.
fn affine_kernel_weights<T: Scalar>(
    images: &[Vec<T>],
    subset: &[usize],
    tol: T,
) -> Option<Vec<T>> {
    let m = subset.len();
    let k = images[0].len();
    // Rows of the (k+1) x m system: constraint rows then the affine row.
    let col = |j: usize, r: usize| if r < k { images[subset[j]][r] } else { T::one() };
    let rhs = |r: usize| if r < k { T::zero() } else { T::one() };
    let mut normal = vec![vec![T::zero(); m]; m];
    let mut nb = vec![T::zero(); m];
    for i in 0..m {
        for j in 0..m {
            normal[i][j] = (0..=k).map(|r| col(i, r) * col(j, r)).sum();
        }
        nb[i] = (0..=k).map(|r| col(i, r) * rhs(r)).sum();
    }
    let lambda = solve_dense(normal, nb)?;
    let wtol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    if lambda.iter().any(|&l| l < -wtol) {
        return None;
    }
    let residual: T = (0..=k)
        .map(|r| {
            let v: T = (0..m).map(|j| col(j, r) * lambda[j]).sum::<T>() - rhs(r);
            v * v
        })
        .sum::<T>()
        .sqrt();
    if residual > tol {
        return None;
    }
    Some(lambda.into_iter().map(|l| l.max(T::zero())).collect())
}

fn orthonormal_rows<T: Scalar>(rows: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    for r in rows {
        let n0 = norm(r);
        if n0 <= tol {
            continue;
        }
        let mut v = r.clone();
        for b in &basis {
            let c = dot(&v, b);
            linalg::axpy(-c, b, &mut v);
        }
        let n = norm(&v);
        if n > tol * n0.max(T::one()) {
            basis.push(linalg::scale(T::one() / n, &v));
        }
    }
    basis
}

pub(crate) fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

/// Deterministic unit directions: evenly spaced angles in 2-D, signed axes plus
/// seeded random unit vectors otherwise.
pub fn direction_family<T: Scalar>(dim: usize, n_dirs: usize) -> Vec<Vec<T>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => (0..n_dirs.max(4))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n_dirs.max(4) as f64;
                vec![T::lit(a.cos()), T::lit(a.sin())]
            })
            .collect(),
        d => {
            let mut out = Vec::with_capacity(n_dirs.max(2 * d));
            for i in 0..d {
                out.push(linalg::unit_vector(d, i));
                out.push(linalg::scale(-T::one(), &linalg::unit_vector(d, i)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_D1C5);
            while out.len() < n_dirs {
                let v: Vec<T> = (0..d).map(|_| T::standard_normal(&mut rng)).collect();
                let n = norm(&v);
                if n > T::zero() {
                    out.push(linalg::scale(T::one() / n, &v));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(lo: &[f64], hi: &[f64]) -> ConvexSet<f64> {
        ConvexSet::boxed(lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn box_support_matches_vertex_enumeration() {
        let b = bx(&[-1.0, -1.0], &[1.0, 1.0]);
        let oracle = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
            .iter()
            .map(|v| v[0] + v[1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(b.support(&[1.0, 1.0]).unwrap(), oracle);
        assert_eq!(oracle, 2.0);
    }

    #[test]
    fn singleton_support_is_inner_product() {
        let s = ConvexSet::singleton(vec![0.5, -2.0]);
        assert_eq!(s.support(&[3.0, 1.0]).unwrap(), 3.0 * 0.5 - 2.0);
    }

    #[test]
    fn ball_support_matches_dense_circle_sampling() {
        let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = [3.0, 4.0];
        let oracle = (0..100_000)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 100_000.0;
                p[0] * a.cos() + p[1] * a.sin()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let s = ball.support(&p).unwrap();
        assert!((s - 5.0).abs() < 1e-12);
        assert!((s - oracle).abs() < 1e-8);
    }

    #[test]
    fn support_dimension_mismatch() {
        let b = bx(&[0.0], &[1.0]);
        assert_eq!(
            b.support(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn contains_interval_cases() {
        let b = bx(&[-1.0], &[1.0]);
        assert!(b.contains(&[0.0], 0.0).unwrap());
        assert!(!b.contains(&[1.5], 0.0).unwrap());
        assert!(b.contains(&[1.5], 0.5).unwrap());
    }

    #[test]
    fn contains_triangle_interior_point() {
        let tri =
            ConvexSet::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        // barycentric coordinates of (0.25, 0.25): (0.5, 0.25, 0.25), all nonnegative
        let v = [0.25, 0.25];
        let bary = [1.0 - v[0] - v[1], v[0], v[1]];
        assert!(bary.iter().all(|&b| b >= 0.0));
        assert!(tri.contains(&v, 0.0).unwrap());
        assert!(!tri.contains(&[0.6, 0.6], 0.0).unwrap());
    }

    #[test]
    fn minkowski_sum_examples() {
        let b = bx(&[-1.0], &[1.0]);
        let s = b.minkowski_sum(&ConvexSet::singleton(vec![2.0])).unwrap();
        // interval arithmetic: [-1, 1] + {2} = [1, 3]
        assert_eq!(s.support(&[1.0]).unwrap(), 3.0);
        assert_eq!(s.support(&[-1.0]).unwrap(), -1.0);

        let z = b.minkowski_sum(&ConvexSet::zero(1)).unwrap();
        assert_eq!(z.support(&[-1.0]).unwrap(), b.support(&[-1.0]).unwrap());

        let balls = ConvexSet::ball(vec![0.0, 0.0], 1.0)
            .unwrap()
            .minkowski_sum(&ConvexSet::ball(vec![0.0, 0.0], 2.0).unwrap())
            .unwrap();
        for k in 0..16 {
            let a = k as f64 * 0.4;
            assert!((balls.support(&[a.cos(), a.sin()]).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_examples() {
        let b = bx(&[-1.0], &[1.0]);
        assert_eq!(b.scale(2.0).unwrap().support(&[1.0]).unwrap(), 2.0);
        assert_eq!(b.scale(0.0).unwrap().support(&[1.0]).unwrap(), 0.0);
        assert_eq!(b.scale(1.0).unwrap().support(&[-1.0]).unwrap(), 1.0);
        assert_eq!(b.scale(-1.0), Err(Error::NegativeScale(-1.0)));
    }

    #[test]
    fn hausdorff_examples() {
        let a = bx(&[0.0], &[1.0]);
        assert_eq!(a.hausdorff(&a, 2).unwrap(), 0.0);
        let s = ConvexSet::zero(1);
        assert_eq!(s.hausdorff(&bx(&[-1.0], &[1.0]), 2).unwrap(), 1.0);
        assert_eq!(a.hausdorff(&bx(&[2.0], &[3.0]), 2).unwrap(), 4.0);
        assert!(a.hausdorff(&a, 1).is_err());
    }

    #[test]
    fn least_norm_of_sum_with_ball() {
        let s = bx(&[2.0, -1.0], &[3.0, 1.0])
            .minkowski_sum(&ConvexSet::ball(vec![0.0, 0.0], 0.5).unwrap())
            .unwrap();
        let ln = s.least_norm().unwrap();
        assert!((ln[0] - 1.5).abs() < 1e-12 && ln[1].abs() < 1e-12);
    }

    #[test]
    fn min_norm_point_on_segment() {
        let seg = ConvexSet::<f64>::polytope(vec![vec![-1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let ln = seg.least_norm().unwrap();
        assert!(ln[0].abs() < 1e-12 && (ln[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_intersection_of_interval_is_origin() {
        let f = bx(&[-1.0], &[1.0]);
        let r = f.intersect_kernel(&[vec![1.0]], 1e-9).unwrap().unwrap();
        assert_eq!(r.extreme_points().unwrap(), vec![vec![0.0]]);
        let g = bx(&[0.5], &[1.0]);
        assert!(g.intersect_kernel(&[vec![1.0]], 1e-9).unwrap().is_none());
    }

    #[test]
    fn kernel_intersection_of_square_with_line() {
        let sq = bx(&[-1.0, -1.0], &[1.0, 1.0]);
        // q1 - q2 = 0: the diagonal segment from (-1,-1) to (1,1).
        let d = sq.intersect_kernel(&[vec![1.0, -1.0]], 1e-9).unwrap().unwrap();
        assert!((d.support(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((d.support(&[1.0, -1.0]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn vertex_indexing_covers_box() {
        let b = bx(&[0.0, 0.0, 5.0], &[1.0, 2.0, 5.0]);
        assert_eq!(b.vertex_count(), 4);
        let mut seen: Vec<Vec<f64>> = (0..4).map(|i| b.vertex_at(i)).collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        assert_eq!(seen.len(), 4);
    }
}
