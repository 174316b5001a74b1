//! Certificates, deterministic inclusion paths and SDI simulation.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sadi::inclusion::{epsilon_chain_diagnostic, integrate_projected, ChainOutcome, ChainReport, ChainSearch, InclusionPath};
use sadi::lyapunov::StabilityCertificate;
use sadi::rates::{classical_half_identity, compare_to_sdi, simulate_sdi_ensemble, NormalizedSeries, SdiComparison, SdiModel};
use sadi::linalg::Matrix;
use sadi::sa::derive_key;
use sadi::setvalued::SelectorStrategy;

use crate::build::{selector, Experiment};
use crate::error::CliError;
use crate::runner::{num, Provenance};

pub struct CertifyOutput {
    pub roots_ok: bool,
    pub certificate: Option<StabilityCertificate<f64>>,
    pub text: String,
}

impl CertifyOutput {
    pub fn passed(&self) -> bool {
        self.roots_ok && self.certificate.as_ref().is_none_or(StabilityCertificate::passed)
    }
}

/// Root check plus, when the preset has a Lyapunov bundle, its certificate.
pub fn certify(exp: &Experiment) -> Result<CertifyOutput, CliError> {
    let p = &exp.preset;
    let roots_ok = p.root_check(exp.config.tolerances.root)?;
    let mut text = Provenance::of(exp).header();
    let _ = writeln!(text, "# preset: {} ({})", p.name, p.note);
    for w in &p.warnings {
        let _ = writeln!(text, "# warning: {w}");
    }
    for r in &p.roots {
        let xs: Vec<String> = r.iter().map(|&v| num(v)).collect();
        let _ = writeln!(text, "# root: [{}]", xs.join(";"));
    }
    let _ = writeln!(text, "# roots_ok = {roots_ok}");
    let certificate = match &p.lyapunov {
        Some(_) => {
            let c = p.certify()?;
            text.push_str(&c.to_report());
            Some(c)
        }
        None => {
            let _ = writeln!(text, "# no Lyapunov bundle for this preset");
            None
        }
    };
    Ok(CertifyOutput { roots_ok, certificate, text })
}

pub fn strategy(exp: &Experiment) -> SelectorStrategy<f64> {
    exp.config.selector.as_ref().map(selector).unwrap_or_default()
}

/// Euler paths of the mean-field inclusion from every start.
pub fn simulate_di(exp: &Experiment) -> Result<Vec<InclusionPath<f64>>, CliError> {
    let di = &exp.config.di;
    let strat = strategy(exp);
    exp.starts
        .iter()
        .enumerate()
        .map(|(s, x0)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_key(exp.config.seed, s as u64, u64::MAX - 1));
            integrate_projected(
                &exp.preset.mean_field,
                None,
                &exp.preset.problem.projection,
                x0,
                di.dt,
                di.horizon,
                &strat,
                &mut rng,
            )
            .map_err(CliError::from)
        })
        .collect()
}

pub fn di_csv(exp: &Experiment, path: &InclusionPath<f64>) -> String {
    let p = Provenance::of(exp);
    path.to_csv(&[
        format!("sadi {}", p.version),
        format!("config: {}", p.name),
        format!("fingerprint: {}", p.fingerprint),
        format!("seed: {}", p.seed),
    ])
}

pub fn chain(exp: &Experiment) -> Result<Option<Vec<ChainReport<f64>>>, CliError> {
    let Some(c) = &exp.config.chain else { return Ok(None) };
    let search = ChainSearch { eps: c.eps, t_min: c.t_min, dt: c.dt, strategy: strategy(exp), budget: c.budget };
    Ok(Some(epsilon_chain_diagnostic(&exp.preset.mean_field, None, &c.probes, &search)?))
}

pub fn chain_text(exp: &Experiment, reports: &[ChainReport<f64>]) -> String {
    let mut s = Provenance::of(exp).header();
    let _ = writeln!(s, "probe,outcome,segments,distance");
    for r in reports {
        let probe: Vec<String> = r.probe.iter().map(|&v| num(v)).collect();
        let (outcome, segs, dist) = match &r.outcome {
            ChainOutcome::Found { starts, end_distance } => ("found", starts.len(), *end_distance),
            ChainOutcome::Exhausted { explored, best_distance } => ("exhausted", *explored, *best_distance),
        };
        let _ = writeln!(s, "[{}],{outcome},{segs},{}", probe.join(";"), num(dist));
    }
    s
}

pub fn sdi_model(exp: &Experiment) -> Result<SdiModel<f64>, CliError> {
    let spec = exp
        .config
        .sdi
        .as_ref()
        .ok_or_else(|| CliError::Setup("the config has no sdi section".into()))?;
    let half = spec.half_identity.unwrap_or_else(|| classical_half_identity(&exp.preset.problem.schedule));
    Ok(SdiModel::linear(Matrix::from_rows(&spec.a)?, half, Matrix::from_rows(&spec.sigma)?)?)
}

pub struct SdiOutput {
    pub finals: Vec<Vec<f64>>,
    pub comparisons: Vec<SdiComparison<f64>>,
}

/// `U(t_eval)` over the SDI replications and, when normalized SA series are
/// given, a KS comparison per start anchored `t_eval` before the horizon.
pub fn simulate_sdi(exp: &Experiment, series: &[Vec<NormalizedSeries<f64>>]) -> Result<SdiOutput, CliError> {
    let spec = exp.config.sdi.as_ref().ok_or_else(|| CliError::Setup("the config has no sdi section".into()))?;
    let model = sdi_model(exp)?;
    let d = model.dim();
    let reps = spec.replications.unwrap_or(exp.config.replications);
    let u0 = spec.u0.clone().unwrap_or_else(|| vec![0.0; d]);
    let strat = strategy(exp);
    let finals = simulate_sdi_ensemble(&model, &vec![u0; reps], spec.dt, spec.t_eval, &strat, exp.config.seed)?;
    let mut comparisons = Vec::new();
    for (s, ens) in series.iter().enumerate() {
        let sched = &exp.preset.problem.schedule;
        let t_end = sched.time_mesh(exp.config.iterations);
        if t_end < spec.t_eval {
            return Err(CliError::Setup(format!(
                "the SA horizon t_N = {t_end} is shorter than t_eval = {}",
                spec.t_eval
            )));
        }
        let anchor = sched.mesh_index(t_end - spec.t_eval);
        let seed = derive_key(exp.config.seed, s as u64, u64::MAX - 2);
        comparisons.push(compare_to_sdi(ens, anchor, &model, spec.t_eval, reps, spec.dt, &strat, seed)?);
    }
    Ok(SdiOutput { finals, comparisons })
}

pub fn sdi_csv(exp: &Experiment, out: &SdiOutput) -> String {
    let mut s = Provenance::of(exp).header();
    let d = out.finals.first().map_or(0, Vec::len);
    let mut header = vec!["replication".to_string()];
    header.extend((0..d).map(|i| format!("u{i}")));
    let _ = writeln!(s, "{}", header.join(","));
    for (r, u) in out.finals.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(u.iter().map(|&v| num(v)));
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn comparison_text(exp: &Experiment, out: &SdiOutput) -> String {
    let mut s = Provenance::of(exp).header();
    let _ = writeln!(s, "start,anchor,eval_index,t_eval,coordinate,ks");
    for (i, c) in out.comparisons.iter().enumerate() {
        for (k, ks) in c.ks.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{},{},{k},{}", c.anchor, c.eval_index, num(c.t_eval), num(*ks));
        }
    }
    s
}
