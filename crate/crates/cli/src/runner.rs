//! Replicated runs, aggregation and the run-level artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sadi::linalg;
use sadi::rates::{normalize, quantile, tightness_diagnostic, NormalizedSeries, TightnessReport};
use sadi::sa::{RecordMode, Trajectory};

use crate::build::Experiment;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed decimal format of every number written to disk (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub name: String,
    pub fingerprint: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn of(exp: &Experiment) -> Self {
        Self {
            name: exp.config.name.clone(),
            fingerprint: exp.fingerprint.clone(),
            seed: exp.config.seed,
            version: VERSION.to_string(),
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# sadi {}\n# config: {}\n# fingerprint: {}\n# seed: {}\n",
            self.version, self.name, self.fingerprint, self.seed
        )
    }
}

/// Statistics over replications of the iterate at one index.
#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub ok: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub q05: Vec<f64>,
    pub q50: Vec<f64>,
    pub q95: Vec<f64>,
    /// Distance of the ensemble mean to the target.
    pub error_of_mean: f64,
    /// Mean and standard deviation of the per-replication distance to the target.
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
}

/// What errors are measured against: `x*`, else the nearest declared root.
#[derive(Debug, Clone, PartialEq)]
pub struct Target(pub Vec<Vec<f64>>);

impl Target {
    pub fn of(exp: &Experiment) -> Self {
        match &exp.preset.x_star {
            Some(x) => Self(vec![x.clone()]),
            None => Self(exp.preset.roots.clone()),
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|r| linalg::dist(x, r)).fold(f64::NAN, f64::min)
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    let s = if v.len() > 1 { (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0)).sqrt() } else { 0.0 };
    (m, s)
}

impl Stats {
    /// Sequential reduction in replication order; empty input gives NaNs.
    pub fn compute(n: usize, values: &[Vec<f64>], dim: usize, target: &Target) -> Self {
        if values.is_empty() {
            let nan = vec![f64::NAN; dim];
            return Self {
                n,
                ok: 0,
                mean: nan.clone(),
                std: nan.clone(),
                q05: nan.clone(),
                q50: nan.clone(),
                q95: nan,
                error_of_mean: f64::NAN,
                mean_abs_error: f64::NAN,
                std_abs_error: f64::NAN,
            };
        }
        let mut mean = Vec::with_capacity(dim);
        let mut std = Vec::with_capacity(dim);
        let (mut q05, mut q50, mut q95) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..dim {
            let col: Vec<f64> = values.iter().map(|x| x[k]).collect();
            let (m, s) = mean_std(&col);
            mean.push(m);
            std.push(s);
            q05.push(quantile(&col, 0.05));
            q50.push(quantile(&col, 0.5));
            q95.push(quantile(&col, 0.95));
        }
        let errs: Vec<f64> = values.iter().map(|x| target.distance(x)).collect();
        let (mean_abs_error, std_abs_error) = mean_std(&errs);
        Self {
            n,
            ok: values.len(),
            error_of_mean: target.distance(&mean),
            mean,
            std,
            q05,
            q50,
            q95,
            mean_abs_error,
            std_abs_error,
        }
    }

    pub fn csv_header(dim: usize) -> Vec<String> {
        let mut h = vec!["n".to_string(), "ok".into()];
        for name in ["mean", "std", "q05", "q50", "q95"] {
            h.extend((0..dim).map(|i| format!("{name}{i}")));
        }
        h.extend(["error_of_mean".into(), "mean_abs_error".into(), "std_abs_error".into()]);
        h
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let mut r = vec![self.n.to_string(), self.ok.to_string()];
        for part in [&self.mean, &self.std, &self.q05, &self.q50, &self.q95] {
            r.extend(part.iter().map(|&v| num(v)));
        }
        r.extend([num(self.error_of_mean), num(self.mean_abs_error), num(self.std_abs_error)]);
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub replication: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartReport {
    pub x0: Vec<f64>,
    /// One entry per recorded index `n ≥ 1`; the last is `n = N`.
    pub checkpoints: Vec<Stats>,
    /// Final iterates of the successful replications, in replication order.
    pub finals: Vec<Vec<f64>>,
    pub failures: Vec<Failure>,
}

impl StartReport {
    pub fn final_stats(&self) -> &Stats {
        self.checkpoints.last().expect("at least the final index is recorded")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub provenance: Provenance,
    pub dim: usize,
    pub replications: usize,
    pub starts: Vec<StartReport>,
}

impl AggregateReport {
    pub fn failure_count(&self) -> usize {
        self.starts.iter().map(|s| s.failures.len()).sum()
    }

    /// `report.csv`: provenance comments, then one row per start and checkpoint.
    pub fn to_csv(&self) -> String {
        let mut s = self.provenance.header();
        let _ = writeln!(s, "# replications: {} failures: {}", self.replications, self.failure_count());
        for (i, st) in self.starts.iter().enumerate() {
            let x0: Vec<String> = st.x0.iter().map(|&v| num(v)).collect();
            let _ = writeln!(s, "# start {i}: x0 = [{}]", x0.join(";"));
            for f in &st.failures {
                let _ = writeln!(s, "# failure: start {i} replication {}: {}", f.replication, f.message);
            }
        }
        let mut header = vec!["start".to_string()];
        header.extend(Stats::csv_header(self.dim));
        let _ = writeln!(s, "{}", header.join(","));
        for (i, st) in self.starts.iter().enumerate() {
            for c in &st.checkpoints {
                let mut row = vec![i.to_string()];
                row.extend(c.csv_fields());
                let _ = writeln!(s, "{}", row.join(","));
            }
        }
        s
    }
}

/// Record mode needed by a config: full iterates when normalized series are
/// requested, else checkpoints or only the final iterate.
pub fn record_mode(exp: &Experiment) -> RecordMode {
    let o = &exp.config.outputs;
    if o.tightness || o.sdi_comparison {
        RecordMode::Iterates
    } else {
        match exp.config.checkpoint_every {
            Some(k) => RecordMode::Checkpoints(k),
            None => RecordMode::Final,
        }
    }
}

/// All replications from start `s`, in parallel on the current pool; results
/// in replication order.
pub fn ensemble(exp: &Experiment, s: usize, mode: RecordMode) -> Vec<Result<Trajectory<f64>, sadi::Error>> {
    let c = &exp.config;
    let x0 = &exp.starts[s];
    (0..c.replications as u64)
        .into_par_iter()
        .map(|r| exp.preset.problem.run(x0, c.iterations, c.seed, s as u64, r, mode))
        .collect()
}

fn summarize(exp: &Experiment, s: usize, runs: &[Result<Trajectory<f64>, sadi::Error>], target: &Target) -> StartReport {
    let d = exp.preset.dim();
    let mut failures = Vec::new();
    let mut ok: Vec<&Trajectory<f64>> = Vec::new();
    for (r, t) in runs.iter().enumerate() {
        match t {
            Ok(t) => ok.push(t),
            Err(e) => failures.push(Failure { replication: r as u64, message: e.to_string() }),
        }
    }
    let stride = exp.config.checkpoint_every;
    let indices: Vec<usize> = (1..=exp.config.iterations)
        .filter(|&n| n == exp.config.iterations || stride.is_some_and(|k| n % k == 0))
        .collect();
    let checkpoints = indices
        .iter()
        .map(|&n| {
            let vals: Vec<Vec<f64>> =
                ok.iter().map(|t| t.iterate(n).expect("index recorded").to_vec()).collect();
            Stats::compute(n, &vals, d, target)
        })
        .collect();
    StartReport {
        x0: exp.starts[s].clone(),
        checkpoints,
        finals: ok.iter().map(|t| t.final_state().to_vec()).collect(),
        failures,
    }
}

/// Output of [`run_experiment`] besides the report.
#[derive(Debug, Default)]
pub struct RunArtifacts {
    /// `(start, replication, trajectory)` for the requested replications.
    pub trajectories: Vec<(usize, u64, Trajectory<f64>)>,
    /// Normalized series per start, when a rate diagnostic needs them.
    pub normalized: Vec<Vec<NormalizedSeries<f64>>>,
    pub tightness: Vec<TightnessReport<f64>>,
}

/// Runs every start and replication and aggregates. Replication blow-ups are
/// recorded, not fatal.
pub fn run_experiment(exp: &Experiment) -> Result<(AggregateReport, RunArtifacts), CliError> {
    let target = Target::of(exp);
    let mode = record_mode(exp);
    let needs_series = exp.config.outputs.tightness || exp.config.outputs.sdi_comparison;
    let mut starts = Vec::new();
    let mut art = RunArtifacts::default();
    for s in 0..exp.starts.len() {
        let runs = ensemble(exp, s, mode);
        starts.push(summarize(exp, s, &runs, &target));
        if needs_series {
            let x_star = exp.preset.x_star.clone().ok_or_else(|| {
                CliError::Setup(format!("preset {} has no x* to normalize around", exp.preset.name))
            })?;
            let series = runs
                .iter()
                .filter_map(|t| t.as_ref().ok())
                .map(|t| normalize(t, &x_star, 0))
                .collect::<Result<Vec<_>, _>>()?;
            if exp.config.outputs.tightness {
                art.tightness.push(tightness_diagnostic(
                    &series,
                    exp.config.tightness.kappa,
                    exp.config.tightness.checkpoints,
                )?);
            }
            art.normalized.push(series);
        }
        for &r in &exp.config.outputs.trajectories {
            let t = exp.preset.problem.run(&exp.starts[s], exp.config.iterations, exp.config.seed, s as u64, r, RecordMode::Full);
            match t {
                Ok(t) => art.trajectories.push((s, r, t.with_fingerprint(exp.fingerprint.clone()))),
                Err(e) => eprintln!("trajectory {r} of start {s} not written: {e}"),
            }
        }
    }
    let report = AggregateReport {
        provenance: Provenance::of(exp),
        dim: exp.preset.dim(),
        replications: exp.config.replications,
        starts,
    };
    Ok((report, art))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })
}

fn trajectory_name(exp: &Experiment, start: usize, rep: u64, stem: &str) -> String {
    if exp.starts.len() == 1 {
        format!("{stem}_{rep}.csv")
    } else {
        format!("{stem}_s{start}_{rep}.csv")
    }
}

/// Writes `report.csv` and the requested run artifacts; returns the paths.
pub fn write_run(
    exp: &Experiment,
    report: &AggregateReport,
    art: &RunArtifacts,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: &str| -> Result<(), CliError> {
        let p = out_dir.join(name);
        write_file(&p, body)?;
        written.push(p);
        Ok(())
    };
    put("report.csv", &report.to_csv())?;
    let comments = vec![format!("sadi {VERSION}"), format!("config: {}", exp.config.name)];
    for (s, r, t) in &art.trajectories {
        put(&trajectory_name(exp, *s, *r, "trajectory"), &t.to_csv(&comments))?;
        if exp.config.outputs.normalized {
            if let Some(x_star) = &exp.preset.x_star {
                put(&trajectory_name(exp, *s, *r, "normalized"), &normalized_csv(exp, &normalize(t, x_star, 0)?))?;
            }
        }
    }
    if !art.tightness.is_empty() {
        let mut body = Provenance::of(exp).header();
        for (s, t) in art.tightness.iter().enumerate() {
            let _ = writeln!(body, "# start {s}");
            body.push_str(&t.to_text());
        }
        put("tightness.txt", &body)?;
    }
    Ok(written)
}

fn normalized_csv(exp: &Experiment, u: &NormalizedSeries<f64>) -> String {
    let mut s = Provenance::of(exp).header();
    let d = u.x_star.len();
    let mut header = vec!["n".to_string(), "a".into()];
    header.extend((0..d).map(|i| format!("u{i}")));
    let _ = writeln!(s, "{}", header.join(","));
    for (n, v) in u.indices().iter().zip(u.values()) {
        let mut row = vec![n.to_string(), num(u.schedule().step(*n))];
        row.extend(v.iter().map(|&x| num(x)));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_match_reference_reduction() {
        let vals = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![4.0, -1.0]];
        let t = Target(vec![vec![2.0, 0.0]]);
        let s = Stats::compute(3, &vals, 2, &t);
        assert_eq!(s.mean, vec![7.0 / 3.0, 0.0]);
        let var0 = ((1.0f64 - 7.0 / 3.0).powi(2) + (2.0f64 - 7.0 / 3.0).powi(2) + (4.0f64 - 7.0 / 3.0).powi(2)) / 2.0;
        assert!((s.std[0] - var0.sqrt()).abs() < 1e-12);
        assert!((s.error_of_mean - 1.0 / 3.0).abs() < 1e-12);
        let errs = [1.0, 1.0, 5f64.sqrt()];
        assert!((s.mean_abs_error - errs.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        assert_eq!(s.q50, vec![2.0, 0.0]);
    }

    #[test]
    fn nearest_root_target() {
        let t = Target(vec![vec![0.0, 0.0], vec![2.0, 2.0]]);
        assert_eq!(t.distance(&[2.0, 1.0]), 1.0);
        assert!(Target(vec![]).distance(&[1.0]).is_nan());
    }
}
