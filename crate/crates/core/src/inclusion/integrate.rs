//! Explicit Euler integration of `ẋ ∈ h̄(x) + F(x)` with a selector.

use std::fmt::Write as _;

use rand::RngCore;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, all_finite};
use crate::sa::{fmt_scalar, ProjectionRegion};
use crate::scalar::Scalar;
use crate::setvalued::{SelectorStrategy, SetValuedMap, VectorField};

/// A crossing of a declared discontinuity surface, after which the state was
/// snapped onto the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingEvent {
    pub step: usize,
    pub surface: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionPath<T> {
    pub dt: T,
    pub horizon: T,
    /// `x₀, …, x_K` with `K = ⌈T/dt⌉`.
    pub states: Vec<Vec<T>>,
    /// Selector value used at each step (excludes `h̄`).
    pub selectors: Vec<Vec<T>>,
    pub events: Vec<CrossingEvent>,
}

impl<T: Scalar> InclusionPath<T> {
    pub fn steps(&self) -> usize {
        self.selectors.len()
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_usize(k).unwrap_or_else(T::infinity)
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("nonempty")
    }

    /// State at the last grid time not after `t`.
    pub fn state_at(&self, t: T) -> &[T] {
        let k = (t / self.dt).floor().to_usize().unwrap_or(0).min(self.states.len() - 1);
        &self.states[k]
    }

    /// Same column layout as SA trajectories: `n,t,a,x…,sel…`.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let d = self.states[0].len();
        let mut header = vec!["n".to_string(), "t".into(), "a".into()];
        header.extend((0..d).map(|i| format!("x{i}")));
        header.extend((0..d).map(|i| format!("sel{i}")));
        let _ = writeln!(s, "{}", header.join(","));
        for (k, x) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string(), fmt_scalar(self.time(k)), fmt_scalar(self.dt)];
            row.extend(x.iter().map(|&v| fmt_scalar(v)));
            match self.selectors.get(k) {
                Some(v) => row.extend(v.iter().map(|&c| fmt_scalar(c))),
                None => row.extend(std::iter::repeat_n(String::new(), d)),
            }
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

fn step_count<T: Scalar>(dt: T, horizon: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(horizon >= T::zero()) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {horizon}")));
    }
    // Guard against ratios like 5/1e-3 landing a hair above an integer.
    let ratio = horizon / dt;
    let k = (ratio - ratio * T::epsilon() * T::lit(4.0)).ceil();
    k.to_usize()
        .ok_or_else(|| Error::InvalidParameter("too many integration steps".into()))
}

/// `x_{k+1} = x_k + dt (h̄(x_k) + v_k)` with `v_k` selected from `F(x_k)`.
///
/// Crossing damper: if a step strictly crosses a declared surface of `F`, the
/// new state is projected onto that surface; on a surface the least-norm
/// element is selected regardless of `strategy`, which realizes sliding motion.
pub fn integrate<T: Scalar>(
    map: &SetValuedMap<T>,
    hbar: Option<&VectorField<T>>,
    x0: &[T],
    dt: T,
    horizon: T,
    strategy: &SelectorStrategy<T>,
    rng: &mut dyn RngCore,
) -> Result<InclusionPath<T>> {
    integrate_projected(map, hbar, &ProjectionRegion::None, x0, dt, horizon, strategy, rng)
}

/// As [`integrate`], with every state projected onto `H` (`Π_H` applied after
/// the damper).
#[allow(clippy::too_many_arguments)]
pub fn integrate_projected<T: Scalar>(
    map: &SetValuedMap<T>,
    hbar: Option<&VectorField<T>>,
    proj: &ProjectionRegion<T>,
    x0: &[T],
    dt: T,
    horizon: T,
    strategy: &SelectorStrategy<T>,
    rng: &mut dyn RngCore,
) -> Result<InclusionPath<T>> {
    check_dim(map.dim(), x0.len())?;
    let k_steps = step_count(dt, horizon)?;
    let tol = T::surface_tol();
    let surfaces = map.surfaces();
    let mut x = proj.project(x0)?;
    let mut states = Vec::with_capacity(k_steps + 1);
    let mut selectors = Vec::with_capacity(k_steps);
    let mut events = Vec::new();
    states.push(x.clone());
    for k in 0..k_steps {
        let sides: Vec<i8> = surfaces.iter().map(|s| s.side(&x, tol)).collect();
        let set = map.evaluate(&x)?;
        let on_surface = sides.contains(&0);
        let v = if on_surface {
            set.least_norm()?
        } else {
            strategy.choose(&set, &x, rng)?
        };
        let mut vel = v.clone();
        if let Some(h) = hbar {
            let hv = h(&x);
            check_dim(map.dim(), hv.len())?;
            linalg::axpy(T::one(), &hv, &mut vel);
        }
        let mut next = x.clone();
        linalg::axpy(dt, &vel, &mut next);
        if !all_finite(&next) {
            return Err(Error::NonFinite { step: k });
        }
        for (i, s) in surfaces.iter().enumerate() {
            let before = sides[i];
            let after = s.side(&next, tol);
            if before != 0 && after == -before {
                next = s.project(&next);
                events.push(CrossingEvent { step: k, surface: i });
            }
        }
        x = proj.project(&next)?;
        states.push(x.clone());
        selectors.push(v);
    }
    Ok(InclusionPath { dt, horizon, states, selectors, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setvalued::{ConvexSet, PiecewiseField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn linear_decay_matches_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h: VectorField<f64> = Arc::new(|x: &[f64]| vec![-x[0]]);
        let p = integrate(&SetValuedMap::zero(1), Some(&h), &[1.0], 1e-3, 5.0, &SelectorStrategy::LeastNorm, &mut rng)
            .unwrap();
        assert_eq!(p.states.len(), 5001);
        assert!((p.final_state()[0] - (-5.0f64).exp()).abs() < 5e-3);
    }

    #[test]
    fn sliding_mode_on_sign_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0);
        let dt: f64 = 1e-3;
        let p = integrate(&m, None, &[1.0], dt, 2.0, &SelectorStrategy::ExtremeVertex(vec![1.0]), &mut rng).unwrap();
        for k in 1100..=2000 {
            assert!(p.states[k][0].abs() <= dt, "k={k}: {}", p.states[k][0]);
        }
    }

    #[test]
    fn projected_path_pinned_at_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = SetValuedMap::constant("two", ConvexSet::singleton(vec![2.0])).unwrap();
        let h = ProjectionRegion::boxed(vec![-1.0], vec![1.0]).unwrap();
        let p = integrate_projected(&m, None, &h, &[0.0], 1e-2, 2.0, &SelectorStrategy::LeastNorm, &mut rng).unwrap();
        assert!(p.states.iter().all(|x| h.contains(x, 1e-12).unwrap()));
        assert_eq!(p.final_state(), &[1.0]);
        let hit = p.states.iter().position(|x| x[0] == 1.0).unwrap();
        assert!(p.states[hit..].iter().all(|x| x[0] == 1.0));
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(step_count(1e-3, 5.0).unwrap(), 5000);
        assert_eq!(step_count(0.3, 1.0).unwrap(), 4);
        assert_eq!(step_count(0.1, 0.0).unwrap(), 0);
        assert!(step_count(0.0, 1.0).is_err());
    }
}
