//! Piecewise set-valued maps with first-match region semantics.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;
use crate::setvalued::ConvexSet;

pub type Predicate<T> = Arc<dyn Fn(&[T]) -> bool + Send + Sync>;
pub type SetRule<T> = Arc<dyn Fn(&[T]) -> Result<ConvexSet<T>> + Send + Sync>;
pub type SampledRule<T> = Arc<dyn Fn(&[T], &[T]) -> Result<ConvexSet<T>> + Send + Sync>;
pub type VectorField<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// Hyperplane `{x : normal^T x = offset}` on which a map or field may jump.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> Surface<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    /// Coordinate threshold `x_i = value` in dimension `dim`.
    pub fn axis(dim: usize, i: usize, value: T) -> Self {
        Self::new(linalg::unit_vector(dim, i), value)
    }

    pub fn level(&self, x: &[T]) -> T {
        dot(&self.normal, x) - self.offset
    }

    /// -1, 0 or 1; zero within `tol` (scaled by the normal's length).
    pub fn side(&self, x: &[T], tol: T) -> i8 {
        let l = self.level(x);
        let band = tol * norm(&self.normal).max(T::one()) * (T::one() + self.offset.abs());
        if l > band {
            1
        } else if l < -band {
            -1
        } else {
            0
        }
    }

    pub fn project(&self, x: &[T]) -> Vec<T> {
        let nn = dot(&self.normal, &self.normal);
        let k = self.level(x) / nn;
        let mut y = x.to_vec();
        linalg::axpy(-k, &self.normal, &mut y);
        // Exact snap for coordinate thresholds.
        if let Some(i) = axis_index(&self.normal) {
            y[i] = self.offset / self.normal[i];
        }
        y
    }
}

fn axis_index<T: Scalar>(n: &[T]) -> Option<usize> {
    let nz: Vec<usize> = (0..n.len()).filter(|&i| n[i] != T::zero()).collect();
    (nz.len() == 1).then(|| nz[0])
}

#[derive(Clone)]
struct Region<T> {
    label: String,
    predicate: Predicate<T>,
    rule: SetRule<T>,
}

/// Total map `x ↦ ConvexSet` defined by an ordered list of regions plus a
/// catch-all. The first region whose predicate holds determines the value.
///
/// Boundary regions must carry the closed value so that the graph is closed;
/// this is a modelling obligation on the caller and is not verified.
#[derive(Clone)]
pub struct SetValuedMap<T> {
    name: String,
    dim: usize,
    regions: Vec<Region<T>>,
    fallback: Region<T>,
    common_bound: T,
    surfaces: Vec<Surface<T>>,
}

impl<T> fmt::Debug for SetValuedMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetValuedMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("regions", &self.regions.iter().map(|r| &r.label).collect::<Vec<_>>())
            .finish()
    }
}

pub struct SetValuedMapBuilder<T> {
    name: String,
    dim: usize,
    common_bound: T,
    regions: Vec<Region<T>>,
    surfaces: Vec<Surface<T>>,
}

impl<T: Scalar> SetValuedMapBuilder<T> {
    pub fn region(
        mut self,
        label: impl Into<String>,
        predicate: impl Fn(&[T]) -> bool + Send + Sync + 'static,
        rule: impl Fn(&[T]) -> Result<ConvexSet<T>> + Send + Sync + 'static,
    ) -> Self {
        self.regions.push(Region {
            label: label.into(),
            predicate: Arc::new(predicate),
            rule: Arc::new(rule),
        });
        self
    }

    pub fn surface(mut self, s: Surface<T>) -> Self {
        self.surfaces.push(s);
        self
    }

    /// Coordinate threshold at `x_i = value`.
    pub fn threshold(self, i: usize, value: T) -> Self {
        let dim = self.dim;
        self.surface(Surface::axis(dim, i, value))
    }

    pub fn otherwise(
        self,
        label: impl Into<String>,
        rule: impl Fn(&[T]) -> Result<ConvexSet<T>> + Send + Sync + 'static,
    ) -> SetValuedMap<T> {
        SetValuedMap {
            name: self.name,
            dim: self.dim,
            regions: self.regions,
            fallback: Region {
                label: label.into(),
                predicate: Arc::new(|_| true),
                rule: Arc::new(rule),
            },
            common_bound: self.common_bound,
            surfaces: self.surfaces,
        }
    }
}

impl<T: Scalar> SetValuedMap<T> {
    pub fn builder(name: impl Into<String>, dim: usize, common_bound: T) -> SetValuedMapBuilder<T> {
        SetValuedMapBuilder {
            name: name.into(),
            dim,
            common_bound,
            regions: Vec::new(),
            surfaces: Vec::new(),
        }
    }

    pub fn from_rule(
        name: impl Into<String>,
        dim: usize,
        common_bound: T,
        rule: impl Fn(&[T]) -> Result<ConvexSet<T>> + Send + Sync + 'static,
    ) -> Self {
        Self::builder(name, dim, common_bound).otherwise("all", rule)
    }

    /// `x ↦ set` for every `x`.
    pub fn constant(name: impl Into<String>, set: ConvexSet<T>) -> Result<Self> {
        let dim = set.dim();
        let bound = set_radius(&set)?;
        Ok(Self::from_rule(name, dim, bound, move |_| Ok(set.clone())))
    }

    /// `x ↦ {0}`.
    pub fn zero(dim: usize) -> Self {
        Self::from_rule("zero", dim, T::zero(), move |_| Ok(ConvexSet::zero(dim)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn common_bound(&self) -> T {
        self.common_bound
    }

    pub fn surfaces(&self) -> &[Surface<T>] {
        &self.surfaces
    }

    pub fn with_surfaces(mut self, surfaces: Vec<Surface<T>>) -> Self {
        self.surfaces = surfaces;
        self
    }

    /// Index of the matching region; `regions().len()` denotes the catch-all.
    pub fn region_index(&self, x: &[T]) -> usize {
        self.regions
            .iter()
            .position(|r| (r.predicate)(x))
            .unwrap_or(self.regions.len())
    }

    pub fn region_label(&self, index: usize) -> &str {
        self.regions
            .get(index)
            .map_or(self.fallback.label.as_str(), |r| r.label.as_str())
    }

    pub fn region_count(&self) -> usize {
        self.regions.len() + 1
    }

    pub fn evaluate(&self, x: &[T]) -> Result<ConvexSet<T>> {
        check_dim(self.dim, x.len())?;
        let region = self
            .regions
            .iter()
            .find(|r| (r.predicate)(x))
            .unwrap_or(&self.fallback);
        let set = (region.rule)(x)?;
        check_dim(self.dim, set.dim())?;
        Ok(set)
    }

    /// `w ↦ F(w + shift)`, keeping the surfaces aligned with the shifted argument.
    pub fn shifted(&self, shift: Vec<T>) -> Result<Self> {
        check_dim(self.dim, shift.len())?;
        let inner = self.clone();
        let s = shift.clone();
        let surfaces = self
            .surfaces
            .iter()
            .map(|sf| Surface::new(sf.normal.clone(), sf.offset - dot(&sf.normal, &shift)))
            .collect();
        Ok(Self::from_rule(
            format!("{}(· + shift)", self.name),
            self.dim,
            self.common_bound,
            move |w| inner.evaluate(&linalg::add(w, &s)),
        )
        .with_surfaces(surfaces))
    }

    /// `x ↦ {f(x)} ⊕ F(x)`. `f_bound` bounds `|f|` on the region of interest.
    pub fn plus_field(&self, f: VectorField<T>, f_bound: T) -> Self {
        let inner = self.clone();
        Self::from_rule(
            format!("{} + h", self.name),
            self.dim,
            self.common_bound + f_bound,
            move |x| inner.evaluate(x)?.shifted(&f(x)),
        )
        .with_surfaces(self.surfaces.clone())
    }
}

/// Noise-indexed set-valued map `(x, ξ) ↦ ConvexSet`, for drifts whose
/// set-valued part depends on the current sample (per-sample subgradients).
#[derive(Clone)]
pub struct SampledSetMap<T> {
    name: String,
    dim: usize,
    common_bound: T,
    rule: SampledRule<T>,
}

impl<T> fmt::Debug for SampledSetMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledSetMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl<T: Scalar> SampledSetMap<T> {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        common_bound: T,
        rule: impl Fn(&[T], &[T]) -> Result<ConvexSet<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            common_bound,
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn common_bound(&self) -> T {
        self.common_bound
    }

    pub fn evaluate(&self, x: &[T], sample: &[T]) -> Result<ConvexSet<T>> {
        check_dim(self.dim, x.len())?;
        let set = (self.rule)(x, sample)?;
        check_dim(self.dim, set.dim())?;
        Ok(set)
    }
}

/// Radius of the smallest origin-centered ball containing `set` along the
/// axis and diagonal directions; exact for boxes and polytopes.
fn set_radius<T: Scalar>(set: &ConvexSet<T>) -> Result<T> {
    if let Ok(points) = set.extreme_points() {
        return Ok(points.iter().map(|p| norm(p)).fold(T::zero(), T::max));
    }
    let dirs = crate::setvalued::direction_family::<T>(set.dim(), 64.max(4 * set.dim()));
    let mut r = T::zero();
    for p in &dirs {
        r = r.max(set.support(p)?);
    }
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::InvalidSet("unbounded set".into()))
    }
}
