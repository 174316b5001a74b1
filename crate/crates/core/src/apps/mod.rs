//! Ready-made problem presets with analytic ground truths.
//!
//! Every preset bundles the recursion ([`Problem`]), a default start, the
//! mean-field inclusion map `h̄ + G`, the known roots and, where one is known,
//! a Lyapunov bundle that can be certified on a grid.

mod lasso;
mod nonconv;
mod pegasos;
mod rootfind;
mod sign_filter;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::{self, norm};
use crate::lyapunov::{certify_stability, Grid, PiecewiseSmoothScalarFn, StabilityCertificate};
use crate::sa::{Problem, SetPart};
use crate::scalar::Scalar;
use crate::setvalued::SetValuedMap;

pub use lasso::{lasso, lasso_minimizer, soft_threshold, LassoData};
pub use nonconv::{nonconvergence, ANNULUS_REGIONS};
pub use pegasos::{pegasos, pegasos_minimizer, Penalty};
pub use rootfind::rootfind;
pub use sign_filter::{laplace_cdf, sign_filter, Regressor, ResidualNoise, SignalLaw};

/// Tolerance of the root check `0 ∈ h̄(x*) + G(x*)`.
pub const ROOT_TOL: f64 = 1e-9;

/// `V`, the collection `𝒰`, the map the decay condition is tested against
/// (centered so that the equilibrium is the origin), the bound `V̂₀` and the
/// grid on which the condition is evaluated.
#[derive(Debug, Clone)]
pub struct LyapunovBundle<T> {
    pub v: PiecewiseSmoothScalarFn<T>,
    pub us: Vec<PiecewiseSmoothScalarFn<T>>,
    pub map: SetValuedMap<T>,
    pub bound: PiecewiseSmoothScalarFn<T>,
    pub grid: Grid<T>,
}

impl<T: Scalar> LyapunovBundle<T> {
    pub fn certify(&self) -> Result<StabilityCertificate<T>> {
        certify_stability(&self.v, &self.us, &self.map, &self.grid, &self.bound)
    }
}

/// Result of auditing selector values against the declared common bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundAudit<T> {
    pub bound: T,
    pub worst: T,
    pub samples: usize,
}

impl<T: Scalar> BoundAudit<T> {
    pub fn passed(&self) -> bool {
        self.worst <= self.bound * (T::one() + T::membership_tol()) + T::membership_tol()
    }
}

#[derive(Debug, Clone)]
pub struct Preset<T> {
    pub name: String,
    pub problem: Problem<T>,
    pub x0: Vec<T>,
    /// Analytic optimum, when unique and known.
    pub x_star: Option<Vec<T>>,
    /// All declared roots of `h̄ + G` (contains `x_star` when present).
    pub roots: Vec<Vec<T>>,
    /// How `x_star` was obtained.
    pub note: String,
    /// Limit inclusion map `x ↦ h̄(x) + G(x)`.
    pub mean_field: SetValuedMap<T>,
    pub lyapunov: Option<LyapunovBundle<T>>,
    /// Box in which the common bound of the set-valued part is declared to hold.
    pub audit_box: (Vec<T>, Vec<T>),
    /// Hypotheses that fail for this instance (the preset is still usable).
    pub warnings: Vec<String>,
}

impl<T: Scalar> Preset<T> {
    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    /// Checks `0 ∈ h̄(r) + G(r)` for every declared root.
    pub fn root_check(&self, tol: T) -> Result<bool> {
        let zero = linalg::zeros(self.dim());
        for r in &self.roots {
            if !self.mean_field.evaluate(r)?.contains(&zero, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn certify(&self) -> Result<StabilityCertificate<T>> {
        self.lyapunov
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("preset {} has no Lyapunov bundle", self.name)))?
            .certify()
    }

    /// Draws `samples` states uniformly from the audit box (and a sample of
    /// `ξ` where the set-valued part depends on it) and records the largest
    /// selector norm, to be compared with the declared common bound.
    pub fn audit_bounds(&self, samples: usize, rng: &mut dyn RngCore) -> Result<BoundAudit<T>> {
        let drift = &self.problem.drift;
        let bound = match drift.set_part() {
            SetPart::None => T::zero(),
            SetPart::Map(m) => m.common_bound(),
            SetPart::Sampled(m) => m.common_bound(),
        };
        let (lo, hi) = &self.audit_box;
        let mut worst = T::zero();
        for _ in 0..samples {
            let x: Vec<T> = lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| l + (h - l) * T::unit_uniform(rng))
                .collect();
            let xi = self.problem.xi.sample(rng)?;
            let set = drift.set_value(&x, &xi)?;
            let b = drift.selector().choose(&set, &x, rng)?;
            worst = worst.max(norm(&b));
        }
        Ok(BoundAudit { bound, worst, samples })
    }

    /// Replaces the default start.
    pub fn with_x0(mut self, x0: Vec<T>) -> Result<Self> {
        crate::error::check_dim(self.dim(), x0.len())?;
        self.x0 = x0;
        Ok(self)
    }
}

/// Grid on `[lo, hi]^d` with a resolution that keeps the point count modest.
pub(crate) fn default_grid<T: Scalar>(dim: usize, lo: T, hi: T, exclude: T) -> Result<Grid<T>> {
    let res = match dim {
        1 => 601,
        2 => 61,
        3 => 13,
        _ => 5,
    };
    Grid::new(vec![lo; dim], vec![hi; dim], res, exclude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_presets() -> Vec<Preset<f64>> {
        vec![
            lasso(0.7, LassoData::scalar_shift(1.0, 1.0)).unwrap(),
            lasso(0.3, LassoData::regression(vec![0.0, 0.0], linalg::Matrix::identity(2), vec![1.0, -0.1], 0.5).unwrap())
                .unwrap(),
            pegasos(1.0, vec![1.0, 2.0], linalg::Matrix::identity(2), Penalty::Full).unwrap(),
            pegasos(1.0, vec![1.0, 2.0], linalg::Matrix::identity(2), Penalty::Half).unwrap(),
            rootfind().unwrap(),
            sign_filter(SignalLaw::unit_regressor(0.5, ResidualNoise::Laplace { scale: 1.0 })).unwrap(),
            nonconvergence().unwrap(),
        ]
    }

    #[test]
    fn every_declared_root_passes() {
        for p in all_presets() {
            assert!(p.root_check(ROOT_TOL).unwrap(), "{}", p.name);
            if let Some(x) = &p.x_star {
                assert!(p.roots.contains(x), "{}", p.name);
            }
        }
    }

    #[test]
    fn selectors_respect_common_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in all_presets() {
            let a = p.audit_bounds(10_000, &mut rng).unwrap();
            assert!(a.passed(), "{}: {:?}", p.name, a);
        }
    }

    #[test]
    fn bundles_certify() {
        for p in all_presets() {
            if p.lyapunov.is_some() {
                let c = p.certify().unwrap();
                assert!(c.passed(), "{}: {:?}", p.name, c.failures().first());
                assert!(c.min_margin() >= -1e-9);
            }
        }
    }
}
