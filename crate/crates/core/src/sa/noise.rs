//! Exogenous noise and bias models.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm, Matrix};
use crate::scalar::Scalar;

pub type Sampler<T> = Arc<dyn Fn(&mut dyn RngCore) -> Vec<T> + Send + Sync>;

/// I.i.d. noise driving one role of the recursion.
#[derive(Clone)]
pub enum NoiseModel<T> {
    /// Identically zero; consumes no randomness.
    None { dim: usize },
    /// `mean + Σ^{1/2} z` with `z` standard normal.
    Gaussian { mean: Vec<T>, cov: Matrix<T>, sqrt: Matrix<T> },
    /// Uniform on a box.
    Uniform { lo: Vec<T>, hi: Vec<T> },
    /// Custom sampler whose output norm never exceeds `bound`.
    Bounded { dim: usize, bound: T, sampler: Sampler<T> },
    /// Custom sampler with no boundedness claim.
    Custom { dim: usize, name: String, sampler: Sampler<T> },
}

impl<T: fmt::Debug> fmt::Debug for NoiseModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None { dim } => write!(f, "None(dim={dim})"),
            Self::Gaussian { mean, .. } => write!(f, "Gaussian(mean={mean:?})"),
            Self::Uniform { lo, hi } => write!(f, "Uniform({lo:?}, {hi:?})"),
            Self::Bounded { dim, bound, .. } => write!(f, "Bounded(dim={dim}, bound={bound:?})"),
            Self::Custom { dim, name, .. } => write!(f, "Custom({name}, dim={dim})"),
        }
    }
}

impl<T: Scalar> NoiseModel<T> {
    pub fn none(dim: usize) -> Self {
        Self::None { dim }
    }

    pub fn gaussian(mean: Vec<T>, cov: Matrix<T>) -> Result<Self> {
        check_dim(mean.len(), cov.rows())?;
        check_dim(mean.len(), cov.cols())?;
        let sqrt = cov.psd_sqrt(T::lit(1e-10))?;
        Ok(Self::Gaussian { mean, cov, sqrt })
    }

    pub fn standard_gaussian(dim: usize) -> Self {
        Self::Gaussian {
            mean: linalg::zeros(dim),
            cov: Matrix::identity(dim),
            sqrt: Matrix::identity(dim),
        }
    }

    pub fn uniform(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("uniform noise box needs lo <= hi".into()));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn bounded(
        dim: usize,
        bound: T,
        sampler: impl Fn(&mut dyn RngCore) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self::Bounded { dim, bound, sampler: Arc::new(sampler) }
    }

    pub fn custom(
        dim: usize,
        name: impl Into<String>,
        sampler: impl Fn(&mut dyn RngCore) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { dim, name: name.into(), sampler: Arc::new(sampler) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::None { dim } | Self::Bounded { dim, .. } | Self::Custom { dim, .. } => *dim,
            Self::Gaussian { mean, .. } => mean.len(),
            Self::Uniform { lo, .. } => lo.len(),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None { .. })
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<T>> {
        Ok(match self {
            Self::None { dim } => linalg::zeros(*dim),
            Self::Gaussian { mean, sqrt, .. } => {
                let z: Vec<T> = (0..mean.len()).map(|_| T::standard_normal(rng)).collect();
                linalg::add(mean, &sqrt.mul_vec(&z)?)
            }
            Self::Uniform { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (h - l) * T::unit_uniform(rng))
                .collect(),
            Self::Bounded { dim, bound, sampler } => {
                let v = sampler(rng);
                check_dim(*dim, v.len())?;
                if norm(&v) > *bound {
                    return Err(Error::InvalidParameter(format!(
                        "bounded noise sample of norm {} exceeds declared bound {bound}",
                        norm(&v)
                    )));
                }
                v
            }
            Self::Custom { dim, sampler, .. } => {
                let v = sampler(rng);
                check_dim(*dim, v.len())?;
                v
            }
        })
    }

    /// Mean, when known in closed form.
    pub fn mean(&self) -> Option<Vec<T>> {
        match self {
            Self::None { dim } => Some(linalg::zeros(*dim)),
            Self::Gaussian { mean, .. } => Some(mean.clone()),
            Self::Uniform { lo, hi } => Some(
                lo.iter().zip(hi).map(|(&l, &h)| (l + h) / T::lit(2.0)).collect(),
            ),
            _ => None,
        }
    }

    /// Covariance, when known in closed form.
    pub fn covariance(&self) -> Option<Matrix<T>> {
        match self {
            Self::None { dim } => Some(Matrix::zeros(*dim, *dim)),
            Self::Gaussian { cov, .. } => Some(cov.clone()),
            Self::Uniform { lo, hi } => Some(Matrix::diagonal(
                &lo.iter()
                    .zip(hi)
                    .map(|(&l, &h)| (h - l) * (h - l) / T::lit(12.0))
                    .collect::<Vec<_>>(),
            )),
            _ => None,
        }
    }
}

/// Bias term `βₙ`.
#[derive(Clone)]
pub enum BiasModel<T> {
    Zero { dim: usize },
    /// Independent `N(0, cₙ I)` with `cₙ = scale · (n + 1)^(−γ)`; `γ = 0` is a constant variance.
    GaussianShrinking { dim: usize, scale: T, gamma: T },
    Constant(Vec<T>),
    /// Custom `(n, rng) ↦ βₙ` with a declared `limsup |βₙ|` (`None` when unbounded).
    Custom {
        dim: usize,
        eta: Option<T>,
        rule: Arc<dyn Fn(usize, &mut dyn RngCore) -> Vec<T> + Send + Sync>,
    },
}

impl<T: fmt::Debug> fmt::Debug for BiasModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero { dim } => write!(f, "Zero(dim={dim})"),
            Self::GaussianShrinking { dim, scale, gamma } => {
                write!(f, "GaussianShrinking(dim={dim}, scale={scale:?}, gamma={gamma:?})")
            }
            Self::Constant(v) => write!(f, "Constant({v:?})"),
            Self::Custom { dim, eta, .. } => write!(f, "Custom(dim={dim}, eta={eta:?})"),
        }
    }
}

impl<T: Scalar> BiasModel<T> {
    pub fn zero(dim: usize) -> Self {
        Self::Zero { dim }
    }

    pub fn gaussian_shrinking(dim: usize, scale: T, gamma: T) -> Result<Self> {
        if !(scale >= T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("bias variance scale must be >= 0, got {scale}")));
        }
        if !(gamma >= T::zero()) {
            return Err(Error::InvalidParameter(format!("bias variance exponent must be >= 0, got {gamma}")));
        }
        Ok(Self::GaussianShrinking { dim, scale, gamma })
    }

    pub fn constant(v: Vec<T>) -> Self {
        Self::Constant(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } | Self::GaussianShrinking { dim, .. } | Self::Custom { dim, .. } => *dim,
            Self::Constant(v) => v.len(),
        }
    }

    /// Variance `cₙ` of each coordinate for the Gaussian family, 0 otherwise.
    pub fn variance(&self, n: usize) -> T {
        match self {
            Self::GaussianShrinking { scale, gamma, .. } => {
                let m = T::from_usize(n + 1).unwrap_or_else(T::infinity);
                if *gamma == T::zero() {
                    *scale
                } else if *gamma == T::one() {
                    *scale / m
                } else {
                    *scale * m.powf(-*gamma)
                }
            }
            _ => T::zero(),
        }
    }

    /// `η = limsup |βₙ|`; `None` when the bias is not almost surely bounded.
    pub fn eta(&self) -> Option<T> {
        match self {
            Self::Zero { .. } => Some(T::zero()),
            Self::GaussianShrinking { scale, gamma, .. } => {
                (*scale == T::zero() || *gamma > T::zero()).then(T::zero)
            }
            Self::Constant(v) => Some(norm(v)),
            Self::Custom { eta, .. } => *eta,
        }
    }

    pub fn sample(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<T>> {
        Ok(match self {
            Self::Zero { dim } => linalg::zeros(*dim),
            Self::GaussianShrinking { dim, .. } => {
                let sd = self.variance(n).sqrt();
                (0..*dim).map(|_| sd * T::standard_normal(rng)).collect()
            }
            Self::Constant(v) => v.clone(),
            Self::Custom { dim, rule, .. } => {
                let v = rule(n, rng);
                check_dim(*dim, v.len())?;
                v
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_shrinking_variance_matches_schedule() {
        let b = BiasModel::<f64>::gaussian_shrinking(1, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [0usize, 9, 99] {
            let draws: Vec<f64> = (0..10_000).map(|_| b.sample(n, &mut rng).unwrap()[0]).collect();
            let var = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
            let c = b.variance(n);
            // Standard error of the second moment is sqrt(2) c / sqrt(N).
            let se = 2f64.sqrt() * c / 100.0;
            assert!((var - c).abs() < 4.0 * se, "n={n}: {var} vs {c}");
        }
        assert_eq!(b.eta(), Some(0.0));
        assert_eq!(BiasModel::<f64>::gaussian_shrinking(1, 1.0, 0.0).unwrap().eta(), None);
    }

    #[test]
    fn bounded_noise_rejects_violations() {
        let n = NoiseModel::<f64>::bounded(1, 1.0, |_| vec![2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(n.sample(&mut rng).is_err());
    }

    #[test]
    fn none_noise_is_zero_and_draw_free() {
        let n = NoiseModel::<f64>::none(2);
        let mut a = ChaCha8Rng::seed_from_u64(2);
        let mut b = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(n.sample(&mut a).unwrap(), vec![0.0, 0.0]);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_moments() {
        let n = NoiseModel::<f64>::uniform(vec![-1.0], vec![3.0]).unwrap();
        assert_eq!(n.mean().unwrap(), vec![1.0]);
        assert!((n.covariance().unwrap()[(0, 0)] - 16.0 / 12.0).abs() < 1e-15);
    }
}
