//! Recorded iterate paths and their continuous-time interpolations.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sa::schedule::locate;
use crate::sa::StepSchedule;
use crate::scalar::Scalar;

/// Per-step record of every summand of the recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog<T> {
    pub a: T,
    pub xi: Vec<T>,
    pub zeta: Vec<T>,
    pub zeta_tilde: Vec<T>,
    /// `bₙ`, including any perturbation.
    pub selector: Vec<T>,
    /// `mₙ`.
    pub perturbation: T,
    pub smooth: Vec<T>,
    pub exogenous: Vec<T>,
    pub bias: Vec<T>,
    /// `X̃ₙ₊₁` before projection.
    pub pre_projection: Vec<T>,
    pub projected: bool,
}

/// What a run keeps in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordMode {
    /// All iterates and step logs.
    Full,
    /// All iterates, no logs.
    Iterates,
    /// `X₀`, every `stride`-th iterate, and the final iterate.
    Checkpoints(usize),
    /// `X₀` and the final iterate.
    Final,
}

impl RecordMode {
    pub(crate) fn keeps(self, n: usize, last: usize) -> bool {
        match self {
            Self::Full | Self::Iterates => true,
            Self::Checkpoints(s) => n == 0 || n == last || n.is_multiple_of(s),
            Self::Final => n == 0 || n == last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationMode {
    /// `X̄⁰(t) = Xₙ` on `[tₙ, tₙ₊₁)`.
    PiecewiseConstant,
    /// `X⁰`: affine between knots.
    PiecewiseLinear,
}

/// Iterates `X₀, …, X_N` (possibly thinned) with their schedule and provenance.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub schedule: StepSchedule<T>,
    pub seed: u64,
    pub start: u64,
    pub replication: u64,
    pub fingerprint: Option<String>,
    steps: usize,
    indices: Vec<usize>,
    states: Vec<Vec<T>>,
    logs: Vec<StepLog<T>>,
    mesh: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub(crate) fn from_parts(
        schedule: StepSchedule<T>,
        seed: u64,
        start: u64,
        replication: u64,
        steps: usize,
        indices: Vec<usize>,
        states: Vec<Vec<T>>,
        logs: Vec<StepLog<T>>,
    ) -> Self {
        let mesh = if indices.len() == steps + 1 {
            schedule.time_mesh_upto(steps)
        } else {
            Vec::new()
        };
        Self { schedule, seed, start, replication, fingerprint: None, steps, indices, states, logs, mesh }
    }

    /// Trajectory from a complete list of iterates, e.g. for externally generated data.
    pub fn from_iterates(schedule: StepSchedule<T>, iterates: Vec<Vec<T>>) -> Result<Self> {
        if iterates.is_empty() {
            return Err(Error::InvalidParameter("a trajectory needs at least one iterate".into()));
        }
        let steps = iterates.len() - 1;
        Ok(Self::from_parts(schedule, 0, 0, 0, steps, (0..=steps).collect(), iterates, Vec::new()))
    }

    pub fn with_fingerprint(mut self, f: impl Into<String>) -> Self {
        self.fingerprint = Some(f.into());
        self
    }

    /// `N`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// `true` when every iterate `0..=N` is stored.
    pub fn is_complete(&self) -> bool {
        self.indices.len() == self.steps + 1
    }

    pub fn initial(&self) -> &[T] {
        &self.states[0]
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("nonempty")
    }

    /// Recorded indices and states.
    pub fn recorded(&self) -> impl Iterator<Item = (usize, &[T])> + '_ {
        self.indices.iter().copied().zip(self.states.iter().map(Vec::as_slice))
    }

    pub fn recorded_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iterate(&self, n: usize) -> Option<&[T]> {
        if self.is_complete() {
            return self.states.get(n).map(Vec::as_slice);
        }
        self.indices.binary_search(&n).ok().map(|i| self.states[i].as_slice())
    }

    pub fn iterates(&self) -> &[Vec<T>] {
        &self.states
    }

    pub fn logs(&self) -> &[StepLog<T>] {
        &self.logs
    }

    /// `tₙ` for `n = 0..=N`; empty for thinned trajectories.
    pub fn times(&self) -> &[T] {
        &self.mesh
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::Unsupported("interpolation needs every iterate recorded".into()))
        }
    }

    /// `X̄⁰(t)` or `X⁰(t)`, or with `shift = n` the shifted process
    /// `Xⁿ(t) = X⁰(t + tₙ)` for `t ≥ −tₙ` and `X₀` for `t ≤ −tₙ`.
    pub fn interpolate(&self, t: T, mode: InterpolationMode, shift: usize) -> Result<Vec<T>> {
        self.require_complete()?;
        if shift > self.steps {
            return Err(Error::InvalidParameter(format!("shift {shift} exceeds {} steps", self.steps)));
        }
        let t0 = self.mesh[shift];
        if t <= -t0 {
            return Ok(self.states[0].clone());
        }
        let s = t + t0;
        let horizon = self.mesh[self.steps];
        if s > horizon {
            return Err(Error::BeyondHorizon { t: s.as_f64(), horizon: horizon.as_f64() });
        }
        let n = locate(&self.mesh, s);
        if n == self.steps || mode == InterpolationMode::PiecewiseConstant {
            return Ok(self.states[n].clone());
        }
        let span = self.mesh[n + 1] - self.mesh[n];
        let wl = (self.mesh[n + 1] - s) / span;
        let wr = (s - self.mesh[n]) / span;
        let mut out = linalg::scale(wl, &self.states[n]);
        linalg::axpy(wr, &self.states[n + 1], &mut out);
        Ok(out)
    }

    /// CSV export: `#` comment lines, a header row, then one row per recorded
    /// iterate. Rows with a step log carry its summands; 17 significant digits.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        if let Some(f) = &self.fingerprint {
            let _ = writeln!(s, "# fingerprint: {f}");
        }
        let _ = writeln!(s, "# seed: {} start: {} replication: {}", self.seed, self.start, self.replication);
        let d = self.dim();
        let mut header = vec!["n".to_string(), "t".to_string(), "a".to_string()];
        header.extend((0..d).map(|i| format!("x{i}")));
        let with_logs = !self.logs.is_empty();
        if with_logs {
            for name in ["sel", "h", "h0", "beta"] {
                header.extend((0..d).map(|i| format!("{name}{i}")));
            }
            header.push("projected".into());
        }
        let _ = writeln!(s, "{}", header.join(","));
        for (k, (n, x)) in self.recorded().enumerate() {
            let t = if self.is_complete() { self.mesh[n] } else { self.schedule.time_mesh(n) };
            let mut row = vec![n.to_string(), fmt(t), fmt(self.schedule.step(n))];
            row.extend(x.iter().map(|&v| fmt(v)));
            if with_logs {
                if let Some(log) = self.logs.get(k).filter(|_| n < self.steps) {
                    for part in [&log.selector, &log.smooth, &log.exogenous, &log.bias] {
                        row.extend(part.iter().map(|&v| fmt(v)));
                    }
                    row.push(u8::from(log.projected).to_string());
                } else {
                    row.extend(std::iter::repeat_n(String::new(), 4 * d + 1));
                }
            }
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

pub(crate) fn fmt<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple() -> Trajectory<f64> {
        let s = StepSchedule::harmonic(1.0).unwrap();
        Trajectory::from_iterates(s, vec![vec![0.0], vec![2.0], vec![3.0], vec![7.0]]).unwrap()
    }

    #[test]
    fn knots_and_midpoints() {
        let tr = simple();
        let t = tr.times().to_vec();
        for n in 0..=3 {
            for m in [InterpolationMode::PiecewiseConstant, InterpolationMode::PiecewiseLinear] {
                assert_eq!(tr.interpolate(t[n], m, 0).unwrap(), tr.iterates()[n]);
            }
        }
        let mid = (t[1] + t[2]) / 2.0;
        let v = tr.interpolate(mid, InterpolationMode::PiecewiseLinear, 0).unwrap();
        assert!((v[0] - 2.5).abs() < 1e-14);
        assert_eq!(tr.interpolate(mid, InterpolationMode::PiecewiseConstant, 0).unwrap(), vec![2.0]);
    }

    #[test]
    fn shifted_process_plateau_and_horizon() {
        let tr = simple();
        let t2 = tr.times()[2];
        assert_eq!(tr.interpolate(-t2 - 1.0, InterpolationMode::PiecewiseLinear, 2).unwrap(), vec![0.0]);
        assert_eq!(tr.interpolate(0.0, InterpolationMode::PiecewiseLinear, 2).unwrap(), vec![3.0]);
        assert!(matches!(
            tr.interpolate(10.0, InterpolationMode::PiecewiseLinear, 0),
            Err(Error::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = simple().with_fingerprint("abc").to_csv(&["demo".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# demo");
        assert_eq!(lines[1], "# fingerprint: abc");
        assert_eq!(lines[3], "n,t,a,x0");
        assert_eq!(lines.len(), 8);
        assert!(lines[5].starts_with("1,1.0000000000000000e0,5.0000000000000000e-1,2.0000000000000000e0"));
    }

    #[test]
    fn record_mode_keeps() {
        assert!(RecordMode::Checkpoints(10).keeps(20, 25));
        assert!(RecordMode::Checkpoints(10).keeps(25, 25));
        assert!(!RecordMode::Checkpoints(10).keeps(21, 25));
        assert!(!RecordMode::Final.keeps(3, 25));
    }
}
