//! Sign-error adaptive filter `θ ← θ + aφ sign(y − φᵀθ)` for `y = φᵀθ† + ε`.

use crate::apps::Preset;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::sa::{Drift, NoiseModel, Problem, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{PiecewiseField, SampledSetMap, Surface};

/// Symmetric residual noise `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualNoise<T> {
    Laplace { scale: T },
    Gaussian { sd: T },
}

impl<T: Scalar> ResidualNoise<T> {
    fn sample(&self, rng: &mut dyn rand::RngCore) -> T {
        match *self {
            Self::Laplace { scale } => {
                let u = T::unit_uniform(rng) - T::lit(0.5);
                let tail = (T::one() - T::lit(2.0) * u.abs()).max(T::min_positive_value());
                -scale * u.signum() * tail.ln()
            }
            Self::Gaussian { sd } => sd * T::standard_normal(rng),
        }
    }

    /// `P(ε ≤ z)`, available in closed form for the Laplace law.
    pub fn cdf(&self, z: T) -> Option<T> {
        match *self {
            Self::Laplace { scale } => Some(laplace_cdf(z, scale)),
            Self::Gaussian { .. } => None,
        }
    }
}

/// CDF of the centered Laplace law with scale `b`.
pub fn laplace_cdf<T: Scalar>(z: T, b: T) -> T {
    let half = T::lit(0.5);
    if z < T::zero() {
        half * (z / b).exp()
    } else {
        T::one() - half * (-z / b).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regressor<T> {
    Constant(Vec<T>),
    Gaussian { mean: Vec<T>, cov: Matrix<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalLaw<T> {
    /// True parameter `θ†`.
    pub theta: Vec<T>,
    pub regressor: Regressor<T>,
    pub noise: ResidualNoise<T>,
}

impl<T: Scalar> SignalLaw<T> {
    /// One-dimensional model with `φ ≡ 1`.
    pub fn unit_regressor(theta: T, noise: ResidualNoise<T>) -> Self {
        Self { theta: vec![theta], regressor: Regressor::Constant(vec![T::one()]), noise }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    fn mean_regressor(&self) -> Vec<T> {
        match &self.regressor {
            Regressor::Constant(p) => p.clone(),
            Regressor::Gaussian { mean, .. } => mean.clone(),
        }
    }

    /// `E[φ sign(y − φᵀθ)] = φ (1 − 2F(φᵀ(θ − θ†)))` for a constant regressor
    /// and a noise law with a closed-form CDF.
    pub fn averaged_drift(&self, theta: &[T]) -> Option<Vec<T>> {
        let Regressor::Constant(phi) = &self.regressor else {
            return None;
        };
        let z = linalg::dot(phi, &linalg::sub(theta, &self.theta));
        let f = self.noise.cdf(z)?;
        Some(linalg::scale(T::one() - T::lit(2.0) * f, phi))
    }

    fn xi(&self) -> Result<NoiseModel<T>> {
        let d = self.dim();
        let theta = self.theta.clone();
        let noise = self.noise;
        Ok(match &self.regressor {
            Regressor::Constant(phi) => {
                check_dim(d, phi.len())?;
                let phi = phi.clone();
                NoiseModel::custom(d + 1, "constant regressor, noisy response", move |rng| {
                    let mut v = phi.clone();
                    v.push(linalg::dot(&phi, &theta) + noise.sample(rng));
                    v
                })
            }
            Regressor::Gaussian { mean, cov } => {
                check_dim(d, mean.len())?;
                let l = cov.psd_sqrt(T::lit(1e-10))?;
                let mean = mean.clone();
                NoiseModel::custom(d + 1, "gaussian regressor, noisy response", move |rng| {
                    let z: Vec<T> = (0..d).map(|_| T::standard_normal(rng)).collect();
                    let mut v: Vec<T> = (0..d).map(|i| mean[i] + linalg::dot(l.row(i), &z)).collect();
                    let y = linalg::dot(&v, &theta) + noise.sample(rng);
                    v.push(y);
                    v
                })
            }
        })
    }

    fn regressor_bound(&self) -> T {
        match &self.regressor {
            Regressor::Constant(p) => linalg::norm(p),
            Regressor::Gaussian { mean, cov } => {
                let tr: T = (0..mean.len()).map(|i| cov[(i, i)]).sum();
                linalg::norm(mean) + T::lit(6.0) * tr.sqrt()
            }
        }
    }
}

/// Sign-error filter preset; `ξ = (φ, y)`, `aₙ = 1/(n+1)`, start at the origin.
///
/// The set-valued part is `φ·𝒦[sign](y − φᵀθ)` per sample; the declared mean
/// field is `φ̄·𝒦[sign](φ̄ᵀ(θ† − θ))`, the sign of the mean residual.
pub fn sign_filter<T: Scalar>(law: SignalLaw<T>) -> Result<Preset<T>> {
    let d = law.dim();
    if d == 0 {
        return Err(Error::InvalidParameter("θ† must be non-empty".into()));
    }
    let sign = PiecewiseField::<T>::scaled_sign(T::one());
    let per_sample = {
        let sign = sign.clone();
        SampledSetMap::new("φ 𝒦[sign](y − φᵀθ)", d, law.regressor_bound(), move |th: &[T], xi: &[T]| {
            let (phi, y) = (&xi[..d], xi[d]);
            let k = sign.krasovskii(&[y - linalg::dot(phi, th)])?;
            // k ⊂ ℝ; lift to φ·k.
            let (lo, hi) = (-k.support(&[-T::one()])?, k.support(&[T::one()])?);
            crate::setvalued::ConvexSet::hull(vec![linalg::scale(lo, phi), linalg::scale(hi, phi)])
        })
    };
    let drift = Drift::new(d).with_sampled_map(per_sample);
    let problem = Problem::new(drift, StepSchedule::harmonic(T::one())?).with_xi(law.xi()?);

    let phibar = law.mean_regressor();
    let th = law.theta.clone();
    let offset = linalg::dot(&phibar, &th);
    let pb = phibar.clone();
    let field = PiecewiseField::new(
        d,
        d,
        vec![Surface::new(phibar.clone(), offset)],
        move |x| {
            let r = offset - linalg::dot(&pb, x);
            if r > T::zero() {
                Some(0)
            } else if r < T::zero() {
                Some(1)
            } else {
                None
            }
        },
        {
            let pb = phibar.clone();
            move |i, _| if i == 0 { pb.clone() } else { linalg::scale(-T::one(), &pb) }
        },
    );
    let mean_field = field.krasovskii_map("φ̄ 𝒦[sign](φ̄ᵀ(θ† − θ))", linalg::norm(&phibar));
    let half = T::lit(5.0);
    Ok(Preset {
        name: "sign_filter".into(),
        problem,
        x0: linalg::zeros(d),
        x_star: Some(law.theta.clone()),
        roots: vec![law.theta.clone()],
        note: "symmetric noise makes the residual median-unbiased at θ†".into(),
        mean_field,
        lyapunov: None,
        audit_box: (linalg::add(&law.theta, &vec![-half; d]), linalg::add(&law.theta, &vec![half; d])),
        warnings: Vec::new(),
    })
}
