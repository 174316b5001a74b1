//! Root finding for `G(w) = (−w₁ + w₂ + h(w₂), −w₁ − w₂ + h(w₁))` with
//! `h(v) = [−1, 1]` at `v = 1` and `{0}` elsewhere.

use crate::apps::{LyapunovBundle, Preset};
use crate::error::Result;
use crate::lyapunov::{Grid, PiecewiseSmoothScalarFn};
use crate::sa::{BiasModel, Drift, Problem, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SetValuedMap, Surface};

/// `max{v − 1, 0} − min{v + 1, 0}` in every coordinate.
fn dead_zone_sum<T: Scalar>() -> Result<PiecewiseSmoothScalarFn<T>> {
    let term = || {
        PiecewiseSmoothScalarFn::piecewise_linear_1d(
            "dead zone",
            vec![-T::one(), T::one()],
            vec![-T::one(), T::zero(), T::one()],
            T::zero(),
        )
    };
    PiecewiseSmoothScalarFn::separable("Σ max{wᵢ−1,0} − min{wᵢ+1,0}", vec![term()?, term()?])
}

/// Fixed two-dimensional preset; root `(0, 0)`, start `(1, 1)`, bias
/// `N(0, I)`, `aₙ = 1/√(n+1)`. The declared common bound holds on `[−3, 3]²`.
pub fn rootfind<T: Scalar>() -> Result<Preset<T>> {
    let s1 = Surface::axis(2, 0, T::one());
    let s2 = Surface::axis(2, 1, T::one());
    let half = T::lit(3.0);
    let bound = T::lit(6.0) + T::lit(2.0).sqrt();
    let (a, b) = (s1.clone(), s2.clone());
    let g = SetValuedMap::builder("set-valued root map", 2, bound)
        .surface(s1)
        .surface(s2)
        .otherwise("all", move |w: &[T]| {
            let base = vec![-w[0] + w[1], -w[0] - w[1]];
            let tol = T::surface_tol();
            let r = [
                if b.side(w, tol) == 0 { T::one() } else { T::zero() },
                if a.side(w, tol) == 0 { T::one() } else { T::zero() },
            ];
            if r == [T::zero(), T::zero()] {
                return Ok(ConvexSet::singleton(base));
            }
            ConvexSet::boxed(vec![base[0] - r[0], base[1] - r[1]], vec![base[0] + r[0], base[1] + r[1]])
        });
    let drift = Drift::new(2).with_map(g.clone());
    let problem = Problem::new(drift, StepSchedule::power_law(T::one(), T::lit(0.5))?)
        .with_bias(BiasModel::gaussian_shrinking(2, T::one(), T::zero())?);
    let lyapunov = LyapunovBundle {
        v: PiecewiseSmoothScalarFn::squared_norm(2),
        us: vec![dead_zone_sum()?],
        map: g.clone(),
        bound: PiecewiseSmoothScalarFn::squared_norm(2),
        grid: Grid::new(vec![-half; 2], vec![half; 2], 61, T::lit(0.01))?,
    };
    Ok(Preset {
        name: "rootfind".into(),
        problem,
        x0: vec![T::one(), T::one()],
        x_star: Some(vec![T::zero(); 2]),
        roots: vec![vec![T::zero(); 2]],
        note: "the linear part is invertible and h vanishes off w₁ = 1, w₂ = 1, so the only root is the origin".into(),
        mean_field: g,
        lyapunov: Some(lyapunov),
        audit_box: (vec![-half; 2], vec![half; 2]),
        warnings: Vec::new(),
    })
}
