//! Drift of the recursion: set-valued part with a selector plus smooth parts.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{check_dim, Result};
use crate::linalg::{self, norm};
use crate::scalar::Scalar;
use crate::sa::NoiseModel;
use crate::setvalued::{ConvexSet, SampledSetMap, SelectorStrategy, SetValuedMap, VectorField};

pub type SmoothFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;
pub type ExogenousFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type PerturbationFn<T> = Arc<dyn Fn(usize, &[T], &[T]) -> Vec<T> + Send + Sync>;

/// Set-valued part `G`, either a plain map of the state or a map of the state
/// and the current sample `ξₙ`.
#[derive(Clone, Debug)]
pub enum SetPart<T> {
    None,
    Map(SetValuedMap<T>),
    Sampled(SampledSetMap<T>),
}

/// `bₙ(x, ξ) + h(x, ζ) + h₀(ζ̃)`, where `bₙ` is a selector of the set-valued
/// part plus an optional perturbation of norm `mₙ(x, ξ)`.
#[derive(Clone)]
pub struct Drift<T> {
    dim: usize,
    set_part: SetPart<T>,
    selector: SelectorStrategy<T>,
    smooth: Option<SmoothFn<T>>,
    mean: Option<VectorField<T>>,
    exogenous: Option<ExogenousFn<T>>,
    perturbation: Option<PerturbationFn<T>>,
}

impl<T: fmt::Debug> fmt::Debug for Drift<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Drift")
            .field("dim", &self.dim)
            .field("set_part", &self.set_part)
            .field("selector", &self.selector)
            .field("smooth", &self.smooth.is_some())
            .field("mean", &self.mean.is_some())
            .finish()
    }
}

impl<T: Scalar> Drift<T> {
    /// Zero drift; extend with the `with_*` builders.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            set_part: SetPart::None,
            selector: SelectorStrategy::LeastNorm,
            smooth: None,
            mean: None,
            exogenous: None,
            perturbation: None,
        }
    }

    pub fn with_map(mut self, map: SetValuedMap<T>) -> Self {
        self.set_part = SetPart::Map(map);
        self
    }

    pub fn with_sampled_map(mut self, map: SampledSetMap<T>) -> Self {
        self.set_part = SetPart::Sampled(map);
        self
    }

    pub fn with_selector(mut self, s: SelectorStrategy<T>) -> Self {
        self.selector = s;
        self
    }

    /// Smooth part `h(x, ζ)`.
    pub fn with_smooth(mut self, h: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.smooth = Some(Arc::new(h));
        self
    }

    /// Mean `h̄(x) = E h(x, ζ)`.
    pub fn with_mean(mut self, h: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.mean = Some(Arc::new(h));
        self
    }

    /// `h₀(ζ̃)`; without it `ζ̃` enters additively as is.
    pub fn with_exogenous(mut self, h0: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.exogenous = Some(Arc::new(h0));
        self
    }

    /// Perturbation added to the selector; its norm plays the role of `mₙ(x, ξ)`.
    pub fn with_perturbation(
        mut self,
        p: impl Fn(usize, &[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        self.perturbation = Some(Arc::new(p));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set_part(&self) -> &SetPart<T> {
        &self.set_part
    }

    pub fn selector(&self) -> &SelectorStrategy<T> {
        &self.selector
    }

    pub fn mean(&self) -> Option<&VectorField<T>> {
        self.mean.as_ref()
    }

    pub fn has_smooth(&self) -> bool {
        self.smooth.is_some()
    }

    /// Set-valued value at `(x, ξ)`; `{0}` when there is no set-valued part.
    pub fn set_value(&self, x: &[T], xi: &[T]) -> Result<ConvexSet<T>> {
        match &self.set_part {
            SetPart::None => Ok(ConvexSet::zero(self.dim)),
            SetPart::Map(m) => m.evaluate(x),
            SetPart::Sampled(m) => m.evaluate(x, xi),
        }
    }

    /// `bₙ(x, ξ)` and the perturbation norm `mₙ`.
    pub fn selector_value(&self, n: usize, x: &[T], xi: &[T], rng: &mut dyn RngCore) -> Result<(Vec<T>, T)> {
        let set = self.set_value(x, xi)?;
        let mut b = self.selector.choose(&set, x, rng)?;
        let mut m = T::zero();
        if let Some(p) = &self.perturbation {
            let e = p(n, x, xi);
            check_dim(self.dim, e.len())?;
            m = norm(&e);
            linalg::axpy(T::one(), &e, &mut b);
        }
        Ok((b, m))
    }

    pub fn smooth_value(&self, x: &[T], zeta: &[T]) -> Result<Vec<T>> {
        match &self.smooth {
            Some(h) => {
                let v = h(x, zeta);
                check_dim(self.dim, v.len())?;
                Ok(v)
            }
            None => Ok(linalg::zeros(self.dim)),
        }
    }

    pub fn exogenous_value(&self, zeta_tilde: &[T]) -> Result<Vec<T>> {
        match &self.exogenous {
            Some(h0) => {
                let v = h0(zeta_tilde);
                check_dim(self.dim, v.len())?;
                Ok(v)
            }
            None => {
                check_dim(self.dim, zeta_tilde.len())?;
                Ok(zeta_tilde.to_vec())
            }
        }
    }

    /// Monte Carlo check of `h̄` against `h` at `probes`: every coordinate of the
    /// sample mean over `draws` samples of `zeta` lies within `k_se` standard
    /// errors of `h̄`. Returns `true` when there is nothing to check.
    pub fn audit_mean(
        &self,
        zeta: &NoiseModel<T>,
        probes: &[Vec<T>],
        draws: usize,
        k_se: T,
        rng: &mut dyn RngCore,
    ) -> Result<bool> {
        let (Some(h), Some(hbar)) = (&self.smooth, &self.mean) else {
            return Ok(true);
        };
        let nd = T::from_usize(draws).unwrap_or_else(T::one);
        for x in probes {
            let mut sum = linalg::zeros::<T>(self.dim);
            let mut sq = linalg::zeros::<T>(self.dim);
            for _ in 0..draws {
                let v = h(x, &zeta.sample(rng)?);
                for k in 0..self.dim {
                    sum[k] += v[k];
                    sq[k] += v[k] * v[k];
                }
            }
            let target = hbar(x);
            for k in 0..self.dim {
                let mean = sum[k] / nd;
                let var = (sq[k] / nd - mean * mean).max(T::zero());
                let se = (var / nd).sqrt();
                let slack = k_se * se + T::membership_tol() * (T::one() + target[k].abs());
                if (mean - target[k]).abs() > slack {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mean_audit_accepts_true_mean_and_rejects_wrong_one() {
        let zeta = NoiseModel::<f64>::standard_gaussian(1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let probes: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 5.0]).collect();
        let good = Drift::new(1).with_smooth(|w, z| vec![1.0 + z[0] - w[0]]).with_mean(|w| vec![1.0 - w[0]]);
        assert!(good.audit_mean(&zeta, &probes, 100_000, 3.0, &mut rng).unwrap());
        let bad = Drift::new(1).with_smooth(|w, z| vec![1.0 + z[0] - w[0]]).with_mean(|w| vec![1.1 - w[0]]);
        assert!(!bad.audit_mean(&zeta, &probes, 100_000, 3.0, &mut rng).unwrap());
    }

    #[test]
    fn perturbation_norm_reported() {
        let d = Drift::<f64>::new(2).with_perturbation(|_, _, _| vec![0.3, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (b, m) = d.selector_value(0, &[0.0, 0.0], &[], &mut rng).unwrap();
        assert_eq!(b, vec![0.3, 0.4]);
        assert!((m - 0.5).abs() < 1e-15);
    }
}
