//! `ℓ₁`-penalized least squares: `w ← w + a[(y − wᵀx)x + g]`, `g ∈ 𝒦[−λ sign](w)`.

use std::sync::Arc;

use crate::apps::{default_grid, LyapunovBundle, Preset};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::lyapunov::PiecewiseSmoothScalarFn;
use crate::sa::{Drift, NoiseModel, Problem, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{PiecewiseField, VectorField};

/// Law of the observations.
#[derive(Debug, Clone)]
pub enum LassoData<T> {
    /// `h(w, ζ) = b − S w + ζ` with centered `ζ`: `S = E[xxᵀ]`, `b = E[xy]`
    /// given directly.
    Additive { s: Matrix<T>, b: Vec<T>, noise: NoiseModel<T> },
    /// `y = xᵀθ + ε`, `x ~ N(μ, C)`, `ε ~ N(0, σ²)`; `ζ = (x, y)`.
    Regression { mean_x: Vec<T>, cov_x: Matrix<T>, sqrt_cov: Matrix<T>, theta: Vec<T>, noise_sd: T },
}

impl<T: Scalar> LassoData<T> {
    /// One-dimensional `h(w, ξ) = b + ξ − w` with `ξ ~ N(0, sd²)`.
    pub fn scalar_shift(b: T, noise_sd: T) -> Self {
        let noise = NoiseModel::Gaussian {
            mean: vec![T::zero()],
            cov: Matrix::diagonal(&[noise_sd * noise_sd]),
            sqrt: Matrix::diagonal(&[noise_sd.abs()]),
        };
        Self::Additive { s: Matrix::identity(1), b: vec![b], noise }
    }

    pub fn additive(s: Matrix<T>, b: Vec<T>, noise: NoiseModel<T>) -> Result<Self> {
        check_dim(s.rows(), b.len())?;
        check_dim(s.cols(), b.len())?;
        check_dim(noise.dim(), b.len())?;
        Ok(Self::Additive { s, b, noise })
    }

    pub fn regression(mean_x: Vec<T>, cov_x: Matrix<T>, theta: Vec<T>, noise_sd: T) -> Result<Self> {
        check_dim(mean_x.len(), cov_x.rows())?;
        check_dim(mean_x.len(), theta.len())?;
        let sqrt_cov = cov_x.psd_sqrt(T::lit(1e-10))?;
        Ok(Self::Regression { mean_x, cov_x, sqrt_cov, theta, noise_sd })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Additive { b, .. } => b.len(),
            Self::Regression { theta, .. } => theta.len(),
        }
    }

    /// `S = E[xxᵀ]`.
    pub fn second_moment(&self) -> Matrix<T> {
        match self {
            Self::Additive { s, .. } => s.clone(),
            Self::Regression { mean_x, cov_x, .. } => {
                let d = mean_x.len();
                let rows: Vec<Vec<T>> = (0..d)
                    .map(|i| (0..d).map(|j| cov_x[(i, j)] + mean_x[i] * mean_x[j]).collect())
                    .collect();
                Matrix::from_rows(&rows).unwrap_or_else(|_| Matrix::zeros(d, d))
            }
        }
    }

    /// `b = E[xy]`.
    pub fn cross_moment(&self) -> Vec<T> {
        match self {
            Self::Additive { b, .. } => b.clone(),
            Self::Regression { theta, .. } => {
                let s = self.second_moment();
                s.mul_vec(theta).unwrap_or_else(|_| linalg::zeros(theta.len()))
            }
        }
    }

    fn zeta(&self) -> NoiseModel<T> {
        match self {
            Self::Additive { noise, .. } => noise.clone(),
            Self::Regression { mean_x, sqrt_cov, theta, noise_sd, .. } => {
                let (mu, l, th, sd) = (mean_x.clone(), sqrt_cov.clone(), theta.clone(), *noise_sd);
                let d = mu.len();
                NoiseModel::custom(d + 1, "gaussian regression (x, y)", move |rng| {
                    let z: Vec<T> = (0..d).map(|_| T::standard_normal(rng)).collect();
                    let mut v: Vec<T> = (0..d).map(|i| mu[i] + linalg::dot(l.row(i), &z)).collect();
                    let y = linalg::dot(&v, &th) + sd * T::standard_normal(rng);
                    v.push(y);
                    v
                })
            }
        }
    }

    fn smooth(&self) -> Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync> {
        match self {
            Self::Additive { s, b, .. } => {
                let (s, b) = (s.clone(), b.clone());
                Arc::new(move |w, z| {
                    (0..b.len()).map(|i| b[i] - linalg::dot(s.row(i), w) + z[i]).collect()
                })
            }
            Self::Regression { theta, .. } => {
                let d = theta.len();
                Arc::new(move |w, z| {
                    let (x, y) = (&z[..d], z[d]);
                    let r = y - linalg::dot(w, x);
                    x.iter().map(|&xi| r * xi).collect()
                })
            }
        }
    }
}

/// `sign(b)·max(|b| − λ, 0)`.
pub fn soft_threshold<T: Scalar>(b: T, lambda: T) -> T {
    if b > lambda {
        b - lambda
    } else if b < -lambda {
        b + lambda
    } else {
        T::zero()
    }
}

/// Minimizer of `½wᵀSw − bᵀw + λ|w|₁` by cyclic coordinate descent.
pub fn lasso_minimizer<T: Scalar>(s: &Matrix<T>, b: &[T], lambda: T) -> Result<Vec<T>> {
    let d = b.len();
    check_dim(s.rows(), d)?;
    check_dim(s.cols(), d)?;
    if (0..d).any(|i| !(s[(i, i)] > T::zero())) {
        return Err(Error::InvalidParameter("E[xxᵀ] needs a positive diagonal".into()));
    }
    let mut w = linalg::zeros::<T>(d);
    for _ in 0..100_000 {
        let mut change = T::zero();
        for i in 0..d {
            let partial = b[i] - (0..d).filter(|&j| j != i).map(|j| s[(i, j)] * w[j]).sum::<T>();
            let next = soft_threshold(partial, lambda) / s[(i, i)];
            change = change.max((next - w[i]).abs());
            w[i] = next;
        }
        if change <= T::epsilon() * (T::one() + linalg::norm(&w)) {
            break;
        }
    }
    Ok(w)
}

/// Lasso preset with penalty `λ ≥ 0` (`λ = 0` is plain least squares).
///
/// Default schedule `aₙ = 1/√(n+1)`, start `5·1`, no bias. The Lyapunov bundle
/// is `V = |w|²`, `𝒰 = {Σwᵢ}` against `w ↦ h̄(w + w*) + G(w + w*)` with bound
/// `c₁|w|²`, `c₁` the smallest eigenvalue of `E[xxᵀ]`.
pub fn lasso<T: Scalar>(lambda: T, data: LassoData<T>) -> Result<Preset<T>> {
    if !(lambda >= T::zero()) {
        return Err(Error::InvalidParameter(format!("λ must be >= 0, got {lambda}")));
    }
    let d = data.dim();
    let s = data.second_moment();
    let b = data.cross_moment();
    let mut warnings = Vec::new();
    let c1 = s.min_eigenvalue()?;
    if !(c1 > T::zero()) {
        warnings.push(format!("E[xxᵀ] is not positive definite (smallest eigenvalue {c1}); the decay bound is vacuous"));
    }
    let x_star = lasso_minimizer(&s, &b, lambda)?;
    let dt = T::from_usize(d).unwrap_or_else(T::one).sqrt();
    let g = PiecewiseField::componentwise_sign(d, -lambda).krasovskii_map("lasso penalty", lambda * dt);
    let (s2, b2) = (s.clone(), b.clone());
    let hbar: VectorField<T> = Arc::new(move |w: &[T]| {
        (0..b2.len()).map(|i| b2[i] - linalg::dot(s2.row(i), w)).collect()
    });
    let half = T::lit(10.0);
    let s_norm = s.to_rows().iter().flatten().map(|v| *v * *v).sum::<T>().sqrt();
    let f_bound = linalg::norm(&b) + s_norm * half * dt;
    let mean_field = g.plus_field(hbar.clone(), f_bound);
    let smooth = data.smooth();
    let drift = Drift::new(d)
        .with_map(g)
        .with_smooth(move |w, z| smooth(w, z))
        .with_mean(move |w| hbar(w));
    let problem = Problem::new(drift, StepSchedule::power_law(T::one(), T::lit(0.5))?).with_zeta(data.zeta());
    let lyapunov = LyapunovBundle {
        v: PiecewiseSmoothScalarFn::squared_norm(d),
        us: vec![PiecewiseSmoothScalarFn::coordinate_sum(d)],
        map: mean_field.shifted(x_star.clone())?,
        bound: PiecewiseSmoothScalarFn::scaled_squared_norm(d, c1),
        grid: default_grid(d, T::lit(-3.0), T::lit(3.0), T::lit(0.01))?,
    };
    Ok(Preset {
        name: "lasso".into(),
        problem,
        x0: vec![T::lit(5.0); d],
        x_star: Some(x_star.clone()),
        roots: vec![x_star],
        note: "coordinate descent on ½wᵀE[xxᵀ]w − E[xy]ᵀw + λ|w|₁ (soft thresholding per coordinate)".into(),
        mean_field,
        lyapunov: Some(lyapunov),
        audit_box: (vec![-half; d], vec![half; d]),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_shift_optimum() {
        let p = lasso::<f64>(0.7, LassoData::scalar_shift(1.0, 1.0)).unwrap();
        assert!((p.x_star.as_ref().unwrap()[0] - 0.3).abs() < 1e-15);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn soft_threshold_kills_small_signal() {
        let data = LassoData::regression(vec![0.0], Matrix::identity(1), vec![0.5], 1.0).unwrap();
        assert_eq!(data.cross_moment(), vec![0.5]);
        let p = lasso(0.7, data).unwrap();
        assert_eq!(p.x_star.unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_penalty_is_least_squares() {
        let cov = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let data = LassoData::regression(vec![0.0, 0.0], cov.clone(), vec![1.0, -2.0], 0.1).unwrap();
        let p = lasso(0.0, data.clone()).unwrap();
        let ls = data.second_moment().solve(&data.cross_moment()).unwrap();
        let x = p.x_star.unwrap();
        assert!(linalg::dist(&x, &ls) < 1e-12, "{x:?} vs {ls:?}");
        assert!(linalg::dist(&ls, &[1.0, -2.0]) < 1e-12);
    }

    #[test]
    fn minimizer_satisfies_subgradient_condition() {
        let s = Matrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 2.0, 0.1], vec![0.0, 0.1, 0.5]]).unwrap();
        let b = vec![1.5, -0.2, 0.05];
        let w: Vec<f64> = lasso_minimizer(&s, &b, 0.4).unwrap();
        let r = linalg::sub(&b, &s.mul_vec(&w).unwrap());
        for i in 0..3 {
            if w[i] == 0.0 {
                assert!(r[i].abs() <= 0.4 + 1e-12);
            } else {
                assert!((r[i] - 0.4 * w[i].signum()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_design_warns() {
        let data = LassoData::additive(
            Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap(),
            vec![1.0, 1.0],
            NoiseModel::none(2),
        )
        .unwrap();
        let p = lasso(0.1, data).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn regression_sample_mean_matches_hbar() {
        use rand::SeedableRng;
        let data = LassoData::regression(vec![1.0, 0.0], Matrix::identity(2), vec![0.5, 1.0], 0.3).unwrap();
        let p = lasso(0.2, data.clone()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ok = p
            .problem
            .drift
            .audit_mean(&p.problem.zeta, &[vec![0.0, 0.0], vec![1.0, -1.0]], 20_000, 5.0, &mut rng)
            .unwrap();
        assert!(ok);
    }
}
