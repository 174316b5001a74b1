//! Normalized iterates `Uₙ = (Xₙ − x*)/√aₙ`.

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::sa::{InterpolationMode, StepSchedule, Trajectory};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct NormalizedSeries<T> {
    pub x_star: Vec<T>,
    pub start: usize,
    schedule: StepSchedule<T>,
    steps: usize,
    indices: Vec<usize>,
    values: Vec<Vec<T>>,
}

/// `Uₙ` for every recorded `n ≥ start`.
pub fn normalize<T: Scalar>(traj: &Trajectory<T>, x_star: &[T], start: usize) -> Result<NormalizedSeries<T>> {
    check_dim(traj.dim(), x_star.len())?;
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for (n, x) in traj.recorded() {
        if n < start {
            continue;
        }
        let s = traj.schedule.step(n).sqrt();
        values.push(linalg::sub(x, x_star).into_iter().map(|d| d / s).collect());
        indices.push(n);
    }
    Ok(NormalizedSeries {
        x_star: x_star.to_vec(),
        start,
        schedule: traj.schedule.clone(),
        steps: traj.steps(),
        indices,
        values,
    })
}

impl<T: Scalar> NormalizedSeries<T> {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn schedule(&self) -> &StepSchedule<T> {
        &self.schedule
    }

    /// Horizon `N` of the underlying trajectory.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn value(&self, n: usize) -> Option<&[T]> {
        self.indices.binary_search(&n).ok().map(|i| self.values[i].as_slice())
    }

    /// `Xₙ = x* + √aₙ Uₙ`.
    pub fn reconstruct(&self, n: usize) -> Option<Vec<T>> {
        let u = self.value(n)?;
        let s = self.schedule.step(n).sqrt();
        Some(self.x_star.iter().zip(u).map(|(&x, &v)| x + s * v).collect())
    }

    /// `U⁰` / `Uⁿ` interpolation under the same rules as the iterates.
    /// Needs a complete series starting at 0.
    pub fn interpolate(&self, t: T, mode: InterpolationMode, shift: usize) -> Result<Vec<T>> {
        if self.start != 0 || self.indices.len() != self.steps + 1 {
            return Err(Error::Unsupported("interpolation needs a complete series from n = 0".into()));
        }
        Trajectory::from_iterates(self.schedule.clone(), self.values.clone())?.interpolate(t, mode, shift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_value_and_reconstruction() {
        let s = StepSchedule::harmonic(1.0).unwrap();
        let mut xs = vec![vec![0.0]; 6];
        xs[5] = vec![0.1];
        let tr = Trajectory::from_iterates(s, xs).unwrap();
        let u = normalize(&tr, &[0.0], 0).unwrap();
        assert!((u.value(5).unwrap()[0] - 0.1 * 6f64.sqrt()).abs() < 1e-15);
        assert!((u.reconstruct(5).unwrap()[0] - 0.1).abs() < 1e-15);
        assert_eq!(u.value(3).unwrap(), &[0.0]);
    }

    #[test]
    fn constant_offset_diverges() {
        let s = StepSchedule::power_law(1.0, 0.5).unwrap();
        let tr = Trajectory::from_iterates(s, vec![vec![1.0]; 50]).unwrap();
        let u = normalize(&tr, &[0.5], 2).unwrap();
        assert_eq!(u.indices()[0], 2);
        assert!(u.values().windows(2).all(|w| w[1][0] > w[0][0]));
    }
}
