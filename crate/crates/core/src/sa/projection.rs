//! Constraint sets `H` and the projection `Π_H`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionRegion<T> {
    None,
    Box { lo: Vec<T>, hi: Vec<T> },
    Ball { center: Vec<T>, radius: T },
}

impl<T: Scalar> ProjectionRegion<T> {
    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidParameter("projection box needs lo < hi".into()));
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("projection radius must be positive, got {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::None => None,
            Self::Box { lo, .. } => Some(lo.len()),
            Self::Ball { center, .. } => Some(center.len()),
        }
    }

    /// Nearest point of `H`; the identity when there is no constraint.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        Ok(match self {
            Self::None => x.to_vec(),
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| v.max(l).min(h))
                .collect(),
            Self::Ball { center, radius } => {
                let diff = linalg::sub(x, center);
                let r = norm(&diff);
                if r <= *radius {
                    x.to_vec()
                } else {
                    // Rounding can leave the scaled point a few ulps outside, which
                    // would break idempotence; shrink until it is inside.
                    let mut f = *radius / r;
                    loop {
                        let p = linalg::add(center, &linalg::scale(f, &diff));
                        if linalg::dist(&p, center) <= *radius {
                            break p;
                        }
                        f *= T::one() - T::epsilon();
                    }
                }
            }
        })
    }

    pub fn contains(&self, x: &[T], tol: T) -> Result<bool> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        Ok(match self {
            Self::None => true,
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol),
            Self::Ball { center, radius } => linalg::dist(x, center) <= *radius + tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_ball_examples() {
        let b = ProjectionRegion::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.project(&[2.0, 0.5]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(b.project(&[0.2, -0.3]).unwrap(), vec![0.2, -0.3]);
        let ball = ProjectionRegion::<f64>::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ball.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_regions() {
        assert!(ProjectionRegion::boxed(vec![1.0], vec![1.0]).is_err());
        assert!(ProjectionRegion::ball(vec![0.0], 0.0).is_err());
    }
}
