//! Stochastic differential inclusions `dU ∈ [(A (+ I/2)) U + T(U)] dt + Σ^{1/2} dW`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::inclusion::InclusionPath;
use crate::linalg::{self, all_finite, Matrix};
use crate::sa::{derive_key, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{direction_family, SelectorStrategy, SetValuedMap};

#[derive(Debug, Clone)]
pub struct SdiModel<T> {
    pub a: Matrix<T>,
    /// Positively homogeneous set-valued part.
    pub t_map: SetValuedMap<T>,
    /// Adds `I/2` to `A`.
    pub half_identity: bool,
    pub sigma: Matrix<T>,
    sigma_sqrt: Matrix<T>,
}

impl<T: Scalar> SdiModel<T> {
    pub fn new(a: Matrix<T>, t_map: SetValuedMap<T>, half_identity: bool, sigma: Matrix<T>) -> Result<Self> {
        let d = a.rows();
        check_dim(d, a.cols())?;
        check_dim(d, t_map.dim())?;
        check_dim(d, sigma.rows())?;
        check_dim(d, sigma.cols())?;
        if !sigma.is_symmetric(T::lit(1e-12)) {
            return Err(Error::InvalidParameter("Σ must be symmetric".into()));
        }
        let sigma_sqrt = sigma.psd_sqrt(T::lit(1e-10))?;
        Ok(Self { a, t_map, half_identity, sigma, sigma_sqrt })
    }

    /// Linear model with `T ≡ {0}`.
    pub fn linear(a: Matrix<T>, half_identity: bool, sigma: Matrix<T>) -> Result<Self> {
        let d = a.rows();
        Self::new(a, SetValuedMap::zero(d), half_identity, sigma)
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `A` or `A + I/2`.
    pub fn drift_matrix(&self) -> Matrix<T> {
        if self.half_identity {
            self.a.add_scaled_identity(T::lit(0.5))
        } else {
            self.a.clone()
        }
    }

    pub fn sigma_sqrt(&self) -> &Matrix<T> {
        &self.sigma_sqrt
    }

    /// Largest `d(T(kx), kT(x))` over `samples` random `(k, x)` with `|x| ≤ radius`.
    pub fn homogeneity_defect(&self, samples: usize, radius: T, rng: &mut dyn RngCore) -> Result<T> {
        let d = self.dim();
        let n_dirs = 64.max(4 * d);
        let mut worst = T::zero();
        for _ in 0..samples {
            let x: Vec<T> = (0..d)
                .map(|_| radius * (T::lit(2.0) * T::unit_uniform(rng) - T::one()))
                .collect();
            let k = T::lit(0.1) + T::lit(4.9) * T::unit_uniform(rng);
            let lhs = self.t_map.evaluate(&linalg::scale(k, &x))?;
            let rhs = self.t_map.evaluate(&x)?.scale(k)?;
            worst = worst.max(lhs.hausdorff(&rhs, n_dirs)?);
        }
        Ok(worst)
    }
}

/// `I/2` correction under the classical pairing: required for `aₙ = 1/(n+1)`,
/// absent for slower power laws.
pub fn classical_half_identity<T: Scalar>(schedule: &StepSchedule<T>) -> bool {
    schedule.is_harmonic_rate()
}

/// Euler–Maruyama with a selector:
/// `u ← u + dt [M u + v] + √dt Σ^{1/2} ξ`, `v` selected from `T(u)`.
/// The recorded selector is the full drift `M u + v`.
pub fn simulate_sdi<T: Scalar>(
    model: &SdiModel<T>,
    u0: &[T],
    dt: T,
    horizon: T,
    strategy: &SelectorStrategy<T>,
    rng: &mut dyn RngCore,
) -> Result<InclusionPath<T>> {
    let d = model.dim();
    check_dim(d, u0.len())?;
    if !(dt > T::zero()) || !(horizon >= T::zero()) {
        return Err(Error::InvalidParameter("dt must be positive and the horizon nonnegative".into()));
    }
    let ratio = horizon / dt;
    let steps = (ratio - ratio * T::epsilon() * T::lit(4.0))
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::InvalidParameter("too many steps".into()))?;
    let m = model.drift_matrix();
    let sq = dt.sqrt();
    let mut u = u0.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    let mut drifts = Vec::with_capacity(steps);
    states.push(u.clone());
    for k in 0..steps {
        let set = model.t_map.evaluate(&u)?;
        let v = strategy.choose(&set, &u, rng)?;
        let drift = linalg::add(&m.mul_vec(&u)?, &v);
        let xi: Vec<T> = (0..d).map(|_| T::standard_normal(rng)).collect();
        let noise = model.sigma_sqrt.mul_vec(&xi)?;
        for i in 0..d {
            u[i] += dt * drift[i] + sq * noise[i];
        }
        if !all_finite(&u) {
            return Err(Error::NonFinite { step: k });
        }
        states.push(u.clone());
        drifts.push(drift);
    }
    Ok(InclusionPath { dt, horizon, states, selectors: drifts, events: Vec::new() })
}

/// `U(horizon)` for `starts.len()` independent replications, replication `r`
/// starting from `starts[r]` with its own stream; parallel, in order.
pub fn simulate_sdi_ensemble<T: Scalar>(
    model: &SdiModel<T>,
    starts: &[Vec<T>],
    dt: T,
    horizon: T,
    strategy: &SelectorStrategy<T>,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    starts
        .par_iter()
        .enumerate()
        .map(|(r, u0)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, u64::MAX, r as u64));
            simulate_sdi(model, u0, dt, horizon, strategy, &mut rng).map(|p| p.final_state().to_vec())
        })
        .collect()
}

/// Default direction family size for support-function comparisons.
pub(crate) fn directions<T: Scalar>(d: usize) -> Vec<Vec<T>> {
    direction_family(d, 64.max(8 * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setvalued::ConvexSet;

    #[test]
    fn deterministic_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = SdiModel::<f64>::linear(Matrix::diagonal(&[-1.0]), false, Matrix::zeros(1, 1)).unwrap();
        let p = simulate_sdi(&m, &[1.0], 1e-3, 3.0, &SelectorStrategy::LeastNorm, &mut rng).unwrap();
        assert!((p.final_state()[0] - (-3.0f64).exp()).abs() < 2e-3);
        let z = SdiModel::<f64>::linear(Matrix::zeros(2, 2), false, Matrix::zeros(2, 2)).unwrap();
        let q = simulate_sdi(&z, &[0.3, -2.0], 1e-2, 1.0, &SelectorStrategy::LeastNorm, &mut rng).unwrap();
        assert!(q.states.iter().all(|u| u == &vec![0.3, -2.0]));
    }

    #[test]
    fn half_identity_shifts_drift() {
        let m = SdiModel::<f64>::linear(Matrix::diagonal(&[-1.0]), true, Matrix::identity(1)).unwrap();
        assert_eq!(m.drift_matrix()[(0, 0)], -0.5);
        assert!(classical_half_identity(&StepSchedule::<f64>::harmonic(1.0).unwrap()));
        assert!(!classical_half_identity(&StepSchedule::<f64>::power_law(1.0, 0.7).unwrap()));
    }

    #[test]
    fn homogeneity_of_cone_map() {
        // T(u) = |u|·[-1, 1] is positively homogeneous.
        let t = SetValuedMap::from_rule("cone", 1, 10.0, |u: &[f64]| ConvexSet::interval(-u[0].abs(), u[0].abs()));
        let m = SdiModel::new(Matrix::zeros(1, 1), t, false, Matrix::zeros(1, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(m.homogeneity_defect(50, 2.0, &mut rng).unwrap() < 1e-12);
    }

    #[test]
    fn indefinite_covariance_rejected() {
        assert!(SdiModel::<f64>::linear(Matrix::zeros(1, 1), false, Matrix::diagonal(&[-1.0])).is_err());
    }
}
