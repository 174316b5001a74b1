//! The recursion `X_{n+1} = Π_H(Xₙ + aₙ[bₙ + h + h₀ + βₙ])`.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, all_finite};
use crate::sa::{
    BiasModel, Drift, NoiseModel, ProjectionRegion, RecordMode, Role, StepLog, StepSchedule, Streams,
    Trajectory,
};
use crate::scalar::Scalar;

/// Complete description of one stochastic approximation scheme.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub drift: Drift<T>,
    /// `ξₙ`, fed to the set-valued part.
    pub xi: NoiseModel<T>,
    /// `ζₙ`, fed to the smooth part.
    pub zeta: NoiseModel<T>,
    /// `ζ̃ₙ`, the additive exogenous term.
    pub zeta_tilde: NoiseModel<T>,
    pub bias: BiasModel<T>,
    pub schedule: StepSchedule<T>,
    pub projection: ProjectionRegion<T>,
}

impl<T: Scalar> Problem<T> {
    /// Noise-free, bias-free, unprojected problem.
    pub fn new(drift: Drift<T>, schedule: StepSchedule<T>) -> Self {
        let d = drift.dim();
        Self {
            drift,
            xi: NoiseModel::none(0),
            zeta: NoiseModel::none(0),
            zeta_tilde: NoiseModel::none(d),
            bias: BiasModel::zero(d),
            schedule,
            projection: ProjectionRegion::None,
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn with_xi(mut self, n: NoiseModel<T>) -> Self {
        self.xi = n;
        self
    }

    pub fn with_zeta(mut self, n: NoiseModel<T>) -> Self {
        self.zeta = n;
        self
    }

    pub fn with_zeta_tilde(mut self, n: NoiseModel<T>) -> Self {
        self.zeta_tilde = n;
        self
    }

    pub fn with_bias(mut self, b: BiasModel<T>) -> Self {
        self.bias = b;
        self
    }

    pub fn with_schedule(mut self, s: StepSchedule<T>) -> Self {
        self.schedule = s;
        self
    }

    pub fn with_projection(mut self, p: ProjectionRegion<T>) -> Self {
        self.projection = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        check_dim(d, self.bias.dim())?;
        check_dim(d, self.zeta_tilde.dim())?;
        if let Some(pd) = self.projection.dim() {
            check_dim(d, pd)?;
        }
        Ok(())
    }

    /// One step from `x` at index `n`.
    pub fn step(&self, x: &[T], n: usize, streams: &mut Streams) -> Result<(Vec<T>, StepLog<T>)> {
        let a = self.schedule.step(n);
        let xi = self.xi.sample(streams.get(Role::Xi))?;
        let zeta = self.zeta.sample(streams.get(Role::Zeta))?;
        let zeta_tilde = self.zeta_tilde.sample(streams.get(Role::ZetaTilde))?;
        let bias = self.bias.sample(n, streams.get(Role::Bias))?;
        let (selector, perturbation) = self.drift.selector_value(n, x, &xi, streams.get(Role::Selector))?;
        let smooth = self.drift.smooth_value(x, &zeta)?;
        let exogenous = self.drift.exogenous_value(&zeta_tilde)?;
        let pre = combine(x, a, &selector, &smooth, &exogenous, &bias);
        if !all_finite(&pre) || !a.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
        let next = self.projection.project(&pre)?;
        let projected = next != pre;
        let log = StepLog {
            a,
            xi,
            zeta,
            zeta_tilde,
            selector,
            perturbation,
            smooth,
            exogenous,
            bias,
            pre_projection: pre,
            projected,
        };
        Ok((next, log))
    }

    /// `steps` iterations from `x0` (projected onto `H` first). Deterministic in
    /// `(seed, start, replication)`.
    pub fn run(
        &self,
        x0: &[T],
        steps: usize,
        seed: u64,
        start: u64,
        replication: u64,
        mode: RecordMode,
    ) -> Result<Trajectory<T>> {
        self.validate()?;
        check_dim(self.dim(), x0.len())?;
        let mut streams = Streams::new(seed, start, replication);
        let mut x = self.projection.project(x0)?;
        if !all_finite(&x) {
            return Err(Error::NonFinite { step: 0 });
        }
        let mut indices = vec![0];
        let mut states = vec![x.clone()];
        let mut logs = Vec::new();
        for n in 0..steps {
            let (next, log) = self.step(&x, n, &mut streams)?;
            if mode == RecordMode::Full {
                logs.push(log);
            }
            x = next;
            if mode.keeps(n + 1, steps) {
                indices.push(n + 1);
                states.push(x.clone());
            }
        }
        Ok(Trajectory::from_parts(
            self.schedule.clone(),
            seed,
            start,
            replication,
            steps,
            indices,
            states,
            logs,
        ))
    }

    /// `replications` independent runs, in parallel on the current rayon pool;
    /// results are in replication order.
    pub fn run_ensemble(
        &self,
        x0: &[T],
        steps: usize,
        seed: u64,
        start: u64,
        replications: usize,
        mode: RecordMode,
    ) -> Vec<Result<Trajectory<T>>> {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| self.run(x0, steps, seed, start, r, mode))
            .collect()
    }
}

/// `x + a (b + h + h₀ + β)`, summed in a fixed order.
fn combine<T: Scalar>(x: &[T], a: T, b: &[T], h: &[T], h0: &[T], beta: &[T]) -> Vec<T> {
    (0..x.len())
        .map(|i| x[i] + a * (b[i] + h[i] + h0[i] + beta[i]))
        .collect()
}

/// Largest deviation between the recorded iterates and their reconstruction
/// from the logged summands. Requires a [`RecordMode::Full`] trajectory.
pub fn audit_decomposition<T: Scalar>(traj: &Trajectory<T>, projection: &ProjectionRegion<T>) -> Result<T> {
    if traj.logs().len() != traj.steps() || !traj.is_complete() {
        return Err(Error::Unsupported("decomposition audit needs a fully logged trajectory".into()));
    }
    let xs = traj.iterates();
    let mut worst = T::zero();
    for (n, log) in traj.logs().iter().enumerate() {
        let pre = combine(&xs[n], log.a, &log.selector, &log.smooth, &log.exogenous, &log.bias);
        worst = worst.max(linalg::dist(&pre, &log.pre_projection));
        let next = projection.project(&pre)?;
        worst = worst.max(linalg::dist(&next, &xs[n + 1]));
    }
    Ok(worst)
}
