//! Tightness, outer `T`-differentiability and distributional comparisons.

use std::fmt::Write as _;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::rates::sdi::directions;
use crate::rates::{simulate_sdi_ensemble, NormalizedSeries, SdiModel};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SelectorStrategy, SetValuedMap};

pub const MIN_TIGHTNESS_ENSEMBLE: usize = 100;
pub const MIN_COMPARISON_ENSEMBLE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TightnessTrend {
    TightConsistent,
    Diverging,
}

impl std::fmt::Display for TightnessTrend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TightConsistent => "tight-consistent",
            Self::Diverging => "diverging",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport<T> {
    pub kappa: T,
    /// `(n, (1 − κ)-quantile of |Uₙ|)`.
    pub checkpoints: Vec<(usize, T)>,
    pub trend: TightnessTrend,
}

impl<T: Scalar> TightnessReport<T> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kappa = {:.16e}", self.kappa);
        let _ = writeln!(s, "trend = {}", self.trend);
        let _ = writeln!(s, "n,quantile");
        for (n, q) in &self.checkpoints {
            let _ = writeln!(s, "{n},{q:.16e}");
        }
        s
    }
}

/// Empirical `p`-quantile by the nearest-rank rule.
pub fn quantile<T: Scalar>(values: &[T], p: T) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    let rank = (p * T::from_usize(n).unwrap_or_else(T::one)).ceil().to_usize().unwrap_or(n);
    v[rank.clamp(1, n) - 1]
}

fn median<T: Scalar>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Up to `k` geometrically spaced indices from `available` (sorted, positive part).
fn geometric_checkpoints(available: &[usize], k: usize) -> Vec<usize> {
    let pos: Vec<usize> = available.iter().copied().filter(|&n| n > 0).collect();
    let (Some(&lo), Some(&hi)) = (pos.first(), pos.last()) else {
        return available.to_vec();
    };
    if k <= 1 || lo == hi {
        return vec![hi];
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (k - 1) as f64);
    let mut out: Vec<usize> = Vec::new();
    for i in 0..k {
        let target = lo as f64 * ratio.powi(i as i32);
        let idx = pos.partition_point(|&n| (n as f64) < target);
        let pick = if idx == 0 {
            pos[0]
        } else if idx >= pos.len() {
            hi
        } else if (pos[idx] as f64 - target) <= (target - pos[idx - 1] as f64) {
            pos[idx]
        } else {
            pos[idx - 1]
        };
        if out.last() != Some(&pick) {
            out.push(pick);
        }
    }
    out
}

/// Empirical `(1 − κ)`-quantiles of `|Uₙ|` at geometric checkpoints. The
/// ensemble is tight-consistent when, over the later half of the checkpoints,
/// the largest quantile is at most twice the median quantile.
pub fn tightness_diagnostic<T: Scalar>(
    ensemble: &[NormalizedSeries<T>],
    kappa: T,
    n_checkpoints: usize,
) -> Result<TightnessReport<T>> {
    if ensemble.len() < MIN_TIGHTNESS_ENSEMBLE {
        return Err(Error::EnsembleTooSmall { found: ensemble.len(), required: MIN_TIGHTNESS_ENSEMBLE });
    }
    if !(kappa > T::zero() && kappa < T::one()) {
        return Err(Error::InvalidParameter(format!("κ must lie in (0, 1), got {kappa}")));
    }
    let common: Vec<usize> = ensemble[0]
        .indices()
        .iter()
        .copied()
        .filter(|&n| ensemble.iter().all(|s| s.value(n).is_some()))
        .collect();
    if common.is_empty() {
        return Err(Error::InvalidParameter("series share no recorded index".into()));
    }
    let idx = geometric_checkpoints(&common, n_checkpoints.max(2));
    let p = T::one() - kappa;
    let checkpoints: Vec<(usize, T)> = idx
        .iter()
        .map(|&n| {
            let mags: Vec<T> = ensemble.iter().map(|s| norm(s.value(n).expect("common index"))).collect();
            (n, quantile(&mags, p))
        })
        .collect();
    let late: Vec<T> = checkpoints[checkpoints.len() / 2..].iter().map(|c| c.1).collect();
    let max = late.iter().copied().fold(T::zero(), T::max);
    let trend = if max <= T::lit(2.0) * median(&late) {
        TightnessTrend::TightConsistent
    } else {
        TightnessTrend::Diverging
    };
    Ok(TightnessReport { kappa, checkpoints, trend })
}

/// Which inclusion [`outer_t_check`] tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainmentSide {
    /// `G(x) ⊂ G(x*) + T(x − x*) + δ|x − x*| B̄`.
    Outer,
    /// The reverse: `G(x*) ⊂ G(x) + T(x − x*) + δ|x − x*| B̄`.
    Inner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentRecord<T> {
    pub x: Vec<T>,
    /// Largest `σ_inner(p) − σ_outer(p)` over the direction family.
    pub excess: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterTReport<T> {
    pub side: ContainmentSide,
    pub delta: T,
    pub records: Vec<ContainmentRecord<T>>,
}

impl<T: Scalar> OuterTReport<T> {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&ContainmentRecord<T>> {
        self.records.iter().filter(|r| !r.pass).collect()
    }
}

/// Support-function test of the outer (or inner) first-order expansion of `G`
/// at `x*` along `T`, at every probe.
pub fn outer_t_check<T: Scalar>(
    g: &SetValuedMap<T>,
    x_star: &[T],
    t_map: &SetValuedMap<T>,
    delta: T,
    probes: &[Vec<T>],
    side: ContainmentSide,
) -> Result<OuterTReport<T>> {
    check_dim(g.dim(), x_star.len())?;
    check_dim(g.dim(), t_map.dim())?;
    if !(delta > T::zero()) {
        return Err(Error::InvalidParameter("δ must be positive".into()));
    }
    let dirs = directions::<T>(g.dim());
    let g_star = g.evaluate(x_star)?;
    let tol = T::membership_tol();
    let mut records = Vec::with_capacity(probes.len());
    for x in probes {
        let dx = linalg::sub(x, x_star);
        let slack = ConvexSet::ball(linalg::zeros(g.dim()), delta * norm(&dx))?;
        let expansion = t_map.evaluate(&dx)?.minkowski_sum(&slack)?;
        let gx = g.evaluate(x)?;
        let (inner, outer) = match side {
            ContainmentSide::Outer => (gx, g_star.minkowski_sum(&expansion)?),
            ContainmentSide::Inner => (g_star.clone(), gx.minkowski_sum(&expansion)?),
        };
        let mut excess = T::neg_infinity();
        for p in &dirs {
            excess = excess.max(inner.support(p)? - outer.support(p)?);
        }
        records.push(ContainmentRecord { x: x.clone(), excess, pass: excess <= tol });
    }
    Ok(OuterTReport { side, delta, records })
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::one();
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    let cmp = |p: &T, q: &T| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal);
    x.sort_by(cmp);
    y.sort_by(cmp);
    let (na, nb) = (x.len(), y.len());
    let (fa, fb) = (T::from_usize(na).unwrap_or_else(T::one), T::from_usize(nb).unwrap_or_else(T::one));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < na && j < nb {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < na && x[i] <= v {
            i += 1;
        }
        while j < nb && y[j] <= v {
            j += 1;
        }
        let ea = T::from_usize(i).unwrap_or_else(T::zero) / fa;
        let eb = T::from_usize(j).unwrap_or_else(T::zero) / fb;
        d = d.max((ea - eb).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdiComparison<T> {
    /// Index `n₀` the comparison was anchored at and the evaluation index.
    pub anchor: usize,
    pub eval_index: usize,
    pub t_eval: T,
    /// KS distance per coordinate.
    pub ks: Vec<T>,
}

impl<T: Scalar> SdiComparison<T> {
    pub fn max_ks(&self) -> T {
        self.ks.iter().copied().fold(T::zero(), T::max)
    }
}

/// Compares the law of `U^{n₀}(t_eval)` over the ensemble with the law of the
/// SDI solution at `t_eval`, started from the empirical `U_{n₀}` values
/// (replication `r` starts from series `r mod len`). Descriptive only.
#[allow(clippy::too_many_arguments)]
pub fn compare_to_sdi<T: Scalar>(
    ensemble: &[NormalizedSeries<T>],
    anchor: usize,
    model: &SdiModel<T>,
    t_eval: T,
    n_sdi_reps: usize,
    dt: T,
    strategy: &SelectorStrategy<T>,
    seed: u64,
) -> Result<SdiComparison<T>> {
    if ensemble.len() < MIN_COMPARISON_ENSEMBLE {
        return Err(Error::EnsembleTooSmall { found: ensemble.len(), required: MIN_COMPARISON_ENSEMBLE });
    }
    if n_sdi_reps < MIN_COMPARISON_ENSEMBLE {
        return Err(Error::EnsembleTooSmall { found: n_sdi_reps, required: MIN_COMPARISON_ENSEMBLE });
    }
    let schedule = ensemble[0].schedule();
    let target = schedule.time_mesh(anchor) + t_eval;
    let eval_index = schedule.mesh_index(target);
    let mut starts = Vec::with_capacity(ensemble.len());
    let mut sa = Vec::with_capacity(ensemble.len());
    for s in ensemble {
        let (Some(u0), Some(ue)) = (s.value(anchor), s.value(eval_index)) else {
            return Err(Error::InvalidParameter(format!(
                "series lacks index {anchor} or {eval_index}"
            )));
        };
        starts.push(u0.to_vec());
        sa.push(ue.to_vec());
    }
    let sdi_starts: Vec<Vec<T>> = (0..n_sdi_reps).map(|r| starts[r % starts.len()].clone()).collect();
    let sim = simulate_sdi_ensemble(model, &sdi_starts, dt, t_eval, strategy, seed)?;
    let ks = (0..model.dim())
        .map(|k| {
            let a: Vec<T> = sa.iter().map(|u| u[k]).collect();
            let b: Vec<T> = sim.iter().map(|u| u[k]).collect();
            ks_distance(&a, &b)
        })
        .collect();
    Ok(SdiComparison { anchor, eval_index, t_eval, ks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sa::{StepSchedule, Trajectory};
    use crate::rates::normalize;
    use crate::setvalued::PiecewiseField;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_distance(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        assert!((ks_distance::<f64>(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantile_nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.9), 9.0);
        assert_eq!(quantile(&v, 0.95), 10.0);
        assert_eq!(quantile(&v, 0.05), 1.0);
    }

    #[test]
    fn geometric_checkpoints_spacing() {
        let avail: Vec<usize> = (0..=1000).collect();
        let c = geometric_checkpoints(&avail, 4);
        assert_eq!(c, vec![1, 10, 100, 1000]);
    }

    fn series(offset: f64, n: usize, reps: usize) -> Vec<NormalizedSeries<f64>> {
        let s = StepSchedule::harmonic(1.0).unwrap();
        (0..reps)
            .map(|_| {
                let tr = Trajectory::from_iterates(s.clone(), vec![vec![offset]; n + 1]).unwrap();
                normalize(&tr, &[0.0], 0).unwrap()
            })
            .collect()
    }

    #[test]
    fn tightness_zero_and_constant_offset() {
        let z = tightness_diagnostic(&series(0.0, 2000, 100), 0.05, 10).unwrap();
        assert_eq!(z.trend, TightnessTrend::TightConsistent);
        assert!(z.checkpoints.iter().all(|c| c.1 == 0.0));
        let c = tightness_diagnostic(&series(0.5, 20_000, 100), 0.05, 10).unwrap();
        assert_eq!(c.trend, TightnessTrend::Diverging);
        assert!(matches!(
            tightness_diagnostic(&series(0.0, 10, 99), 0.05, 10),
            Err(Error::EnsembleTooSmall { .. })
        ));
    }

    #[test]
    fn lasso_outer_and_inner_containment() {
        let g = PiecewiseField::scaled_sign(-0.7).krasovskii_map("lasso", 0.7);
        let zero = SetValuedMap::zero(1);
        let near: Vec<Vec<f64>> = (1..60).map(|i| vec![0.01 * i as f64]).collect();
        let r = outer_t_check(&g, &[0.3], &zero, 0.1, &near, ContainmentSide::Outer).unwrap();
        assert!(r.passed());
        let right: Vec<Vec<f64>> = (1..10).map(|i| vec![0.05 * i as f64]).collect();
        let out = outer_t_check(&g, &[0.0], &zero, 0.1, &right, ContainmentSide::Outer).unwrap();
        assert!(out.passed());
        let inn = outer_t_check(&g, &[0.0], &zero, 0.1, &right, ContainmentSide::Inner).unwrap();
        assert_eq!(inn.failures().len(), right.len());
    }
}
