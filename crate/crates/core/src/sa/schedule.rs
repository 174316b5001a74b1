//! Step-size schedules and the associated time mesh.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type StepRule<T> = Arc<dyn Fn(usize) -> T + Send + Sync>;

/// Step sizes `aₙ`, indexed from `n = 0`. Built-in families use `n + 1` in the
/// denominator so that `a₀` is finite.
#[derive(Clone)]
pub enum StepSchedule<T> {
    /// `c / (n + 1)`.
    Harmonic { c: T },
    /// `c · (n + 1)^(−α)`, `0 < α ≤ 1`.
    PowerLaw { c: T, alpha: T },
    /// User rule; positivity and decay are the caller's responsibility.
    Custom { name: String, rule: StepRule<T> },
}

impl<T: fmt::Debug> fmt::Debug for StepSchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Harmonic { c } => write!(f, "Harmonic(c={c:?})"),
            Self::PowerLaw { c, alpha } => write!(f, "PowerLaw(c={c:?}, alpha={alpha:?})"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl<T: Scalar> StepSchedule<T> {
    pub fn harmonic(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("step constant must be positive, got {c}")));
        }
        Ok(Self::Harmonic { c })
    }

    pub fn power_law(c: T, alpha: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("step constant must be positive, got {c}")));
        }
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidParameter(format!("step exponent must lie in (0, 1], got {alpha}")));
        }
        Ok(Self::PowerLaw { c, alpha })
    }

    pub fn custom(name: impl Into<String>, rule: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        Self::Custom { name: name.into(), rule: Arc::new(rule) }
    }

    /// `aₙ`.
    pub fn step(&self, n: usize) -> T {
        let m = T::from_usize(n + 1).unwrap_or_else(T::infinity);
        match self {
            Self::Harmonic { c } => *c / m,
            Self::PowerLaw { c, alpha } => {
                if *alpha == T::one() {
                    *c / m
                } else if *alpha == T::lit(0.5) {
                    *c / m.sqrt()
                } else {
                    *c * m.powf(-*alpha)
                }
            }
            Self::Custom { rule, .. } => rule(n),
        }
    }

    /// `tₙ = Σ_{i<n} aᵢ`, accumulated left to right.
    pub fn time_mesh(&self, n: usize) -> T {
        let mut t = T::zero();
        for i in 0..n {
            t += self.step(i);
        }
        t
    }

    /// `t₀, …, t_n`.
    pub fn time_mesh_upto(&self, n: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n + 1);
        let mut t = T::zero();
        out.push(t);
        for i in 0..n {
            t += self.step(i);
            out.push(t);
        }
        out
    }

    /// `m(t) = max{n : tₙ ≤ t}`, and `0` for `t < 0`.
    ///
    /// Scans the mesh, so the cost is linear in the answer; if the partial sums
    /// stop growing under rounding, the scan stops and returns the last index.
    pub fn mesh_index(&self, t: T) -> usize {
        if !(t > T::zero()) {
            return 0;
        }
        let mut acc = T::zero();
        let mut n = 0;
        loop {
            let next = acc + self.step(n);
            if next > t || next == acc {
                return n;
            }
            acc = next;
            n += 1;
        }
    }

    /// `true` for the built-in families, whose laws are known analytically.
    pub fn is_builtin(&self) -> bool {
        !matches!(self, Self::Custom { .. })
    }

    /// `true` for `aₙ = c/(n+1)`, i.e. a harmonic schedule or a power law with `α = 1`.
    pub fn is_harmonic_rate(&self) -> bool {
        match self {
            Self::Harmonic { .. } => true,
            Self::PowerLaw { alpha, .. } => *alpha == T::one(),
            Self::Custom { .. } => false,
        }
    }
}

/// Index of `t` in a precomputed increasing mesh: `max{n : mesh[n] ≤ t}`, `0` below the mesh.
pub(crate) fn locate<T: Scalar>(mesh: &[T], t: T) -> usize {
    if mesh.is_empty() || t < mesh[0] {
        return 0;
    }
    mesh.partition_point(|&s| s <= t) - 1
}
