//! Primal SVM subgradient method `w ← w + a[−κλw + g]`, `g ∈ ∂(−max{0, 1 − wᵀx})`.
//!
//! The label is folded into the feature vector, so the expected hinge term is
//! governed by `μ = E[x]`.

use std::str::FromStr;

use crate::apps::{default_grid, LyapunovBundle, Preset};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix};
use crate::lyapunov::PiecewiseSmoothScalarFn;
use crate::sa::{Drift, NoiseModel, Problem, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, PiecewiseField, SampledSetMap, Surface};

/// Convention for the ridge term: `Half` differentiates `(λ/2)|w|²` to `−λw`,
/// `Full` differentiates `λ|w|²` to `−2λw`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    Half,
    Full,
}

impl Penalty {
    pub fn factor<T: Scalar>(self) -> T {
        match self {
            Self::Half => T::one(),
            Self::Full => T::lit(2.0),
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::Half),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidParameter(format!("penalty must be \"half\" or \"full\", got {other:?}"))),
        }
    }
}

/// Root of `0 ∈ −κw + G₁(w)` where `G₁` is the expected hinge subgradient:
/// `μ/κ` when `|μ|² < κ` (hinge active), otherwise `μ/|μ|²` on the kink.
pub fn pegasos_minimizer<T: Scalar>(kappa: T, mu: &[T]) -> Vec<T> {
    let m2 = linalg::dot(mu, mu);
    if m2 == T::zero() {
        linalg::zeros(mu.len())
    } else if m2 < kappa {
        linalg::scale(T::one() / kappa, mu)
    } else {
        linalg::scale(T::one() / m2, mu)
    }
}

/// Pegasos preset with features `x ~ N(μ, C)`.
///
/// Default schedule `aₙ = 1/√(n+1)`, start at the origin. The mean field is
/// `−κλw + 𝒦[g₁](w)` with `g₁(w) = μ·1{μᵀw < 1}`; the Lyapunov bundle is
/// `V = |w|²`, `𝒰 = {Σwᵢ}` on `[−2, 2]^d` with bound `κλ|w|²`.
pub fn pegasos<T: Scalar>(lambda: T, mean: Vec<T>, cov: Matrix<T>, penalty: Penalty) -> Result<Preset<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!("λ must be > 0, got {lambda}")));
    }
    let d = mean.len();
    check_dim(d, cov.rows())?;
    let kappa = penalty.factor::<T>() * lambda;
    let features = NoiseModel::gaussian(mean.clone(), cov.clone())?;
    let trace: T = (0..d).map(|i| cov[(i, i)]).sum();
    // Six-standard-deviation envelope of |x|.
    let x_bound = linalg::norm(&mean) + T::lit(6.0) * trace.sqrt();
    let tol = T::surface_tol();
    let hinge = SampledSetMap::new("hinge subgradient", d, x_bound, move |w: &[T], x: &[T]| {
        let margin = linalg::dot(w, x) - T::one();
        let band = tol * (T::one() + linalg::norm(x) * linalg::norm(w));
        if margin > band {
            Ok(ConvexSet::zero(x.len()))
        } else if margin < -band {
            Ok(ConvexSet::singleton(x.to_vec()))
        } else {
            ConvexSet::hull(vec![linalg::zeros(x.len()), x.to_vec()])
        }
    });
    let drift = Drift::new(d)
        .with_sampled_map(hinge)
        .with_smooth(move |w, _| linalg::scale(-kappa, w))
        .with_mean(move |w| linalg::scale(-kappa, w));
    let problem = Problem::new(drift, StepSchedule::power_law(T::one(), T::lit(0.5))?).with_xi(features);

    let mu = mean.clone();
    let mu_norm = linalg::norm(&mu);
    let surfaces = if mu_norm > T::zero() { vec![Surface::new(mu.clone(), T::one())] } else { Vec::new() };
    let mu_c = mu.clone();
    let field = PiecewiseField::new(
        d,
        d,
        surfaces,
        move |w| {
            let l = linalg::dot(&mu_c, w) - T::one();
            if l > T::zero() {
                Some(0)
            } else if l < T::zero() {
                Some(1)
            } else {
                None
            }
        },
        {
            let mu = mu.clone();
            move |i, w| {
                let mut v = linalg::scale(-kappa, w);
                if i == 1 {
                    linalg::axpy(T::one(), &mu, &mut v);
                }
                v
            }
        },
    );
    let half = T::lit(5.0);
    let dt = T::from_usize(d).unwrap_or_else(T::one).sqrt();
    let mean_field = field.krasovskii_map("pegasos mean field", kappa * half * dt + mu_norm);
    let x_star = pegasos_minimizer(kappa, &mu);
    let lyapunov = LyapunovBundle {
        v: PiecewiseSmoothScalarFn::squared_norm(d),
        us: vec![PiecewiseSmoothScalarFn::coordinate_sum(d)],
        map: mean_field.shifted(x_star.clone())?,
        bound: PiecewiseSmoothScalarFn::scaled_squared_norm(d, kappa),
        grid: default_grid(d, T::lit(-2.0), T::lit(2.0), T::lit(0.01))?,
    };
    Ok(Preset {
        name: "pegasos".into(),
        problem,
        x0: linalg::zeros(d),
        x_star: Some(x_star.clone()),
        roots: vec![x_star],
        note: "stationarity of κλ|w|²/2 + max{0, 1 − μᵀw}: interior branch μ/κ if |μ|² < κ, else the kink point μ/|μ|²".into(),
        mean_field,
        lyapunov: Some(lyapunov),
        audit_box: (vec![-half; d], vec![half; d]),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_optimum_for_both_conventions() {
        for pen in [Penalty::Half, Penalty::Full] {
            let p = pegasos(1.0, vec![1.0, 2.0], Matrix::identity(2), pen).unwrap();
            let x = p.x_star.unwrap();
            assert!(linalg::dist(&x, &[0.2, 0.4]) < 1e-15, "{x:?}");
        }
    }

    #[test]
    fn no_signal_gives_origin() {
        let p = pegasos(1.0, vec![0.0, 0.0], Matrix::identity(2), Penalty::Half).unwrap();
        assert_eq!(p.x_star.clone().unwrap(), vec![0.0, 0.0]);
        assert!(p.root_check(1e-9).unwrap());
    }

    #[test]
    fn active_hinge_in_one_dimension() {
        // λw = m on the active branch, consistent while m·m < 1.
        for m in [0.3, -0.5, 0.9] {
            let p = pegasos::<f64>(1.0, vec![m], Matrix::identity(1), Penalty::Half).unwrap();
            assert!((p.x_star.unwrap()[0] - m).abs() < 1e-15);
        }
    }

    #[test]
    fn penalty_parses() {
        assert_eq!("full".parse::<Penalty>().unwrap(), Penalty::Full);
        assert!("double".parse::<Penalty>().is_err());
    }

    #[test]
    fn kink_mean_field_is_a_segment() {
        let p = pegasos(1.0, vec![1.0, 2.0], Matrix::identity(2), Penalty::Half).unwrap();
        let g = p.mean_field.evaluate(&[0.2, 0.4]).unwrap();
        assert!(g.contains(&[-0.2, -0.4], 1e-12).unwrap());
        assert!(g.contains(&[0.8, 1.6], 1e-12).unwrap());
        assert!(!g.contains(&[0.9, 1.6], 1e-6).unwrap());
    }
}
