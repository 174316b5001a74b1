//! From a validated config to a runnable preset.

use std::sync::Arc;

use sadi::apps::{
    lasso, nonconvergence, pegasos, rootfind, sign_filter, LassoData, Preset, Regressor, ResidualNoise, SignalLaw,
};
use sadi::linalg::{self, Matrix};
use sadi::sa::{BiasModel, Drift, NoiseModel, Problem, ProjectionRegion, StepSchedule};
use sadi::setvalued::{PiecewiseField, SelectorStrategy, Surface, VectorField};

use crate::config::{
    Affine, BiasSpec, ExperimentConfig, InlineDrift, LassoSpec, ModelSpec, ProjectionSpec, RegressorSpec,
    ResidualSpec, ScheduleSpec, SelectorSpec,
};
use crate::error::CliError;

/// A config resolved into a preset (with overrides applied) and its starts.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub preset: Preset<f64>,
    pub starts: Vec<Vec<f64>>,
    pub fingerprint: String,
}

pub fn build(config: &ExperimentConfig) -> Result<Experiment, CliError> {
    let mut preset = model(&config.model)?;
    let d = preset.dim();
    let mut problem = preset.problem.clone();
    if let Some(s) = &config.schedule {
        problem = problem.with_schedule(schedule(s)?);
    }
    if let Some(b) = &config.bias {
        problem = problem.with_bias(bias(b, d)?);
    }
    if let Some(p) = &config.projection {
        problem = problem.with_projection(match p {
            ProjectionSpec::Box { lo, hi } => ProjectionRegion::boxed(lo.clone(), hi.clone())?,
            ProjectionSpec::Ball { center, radius } => ProjectionRegion::ball(center.clone(), *radius)?,
        });
    }
    if let Some(s) = &config.selector {
        problem.drift = problem.drift.clone().with_selector(selector(s));
    }
    preset.problem = problem;
    let starts = config.starts.clone().unwrap_or_else(|| vec![preset.x0.clone()]);
    Ok(Experiment { config: config.clone(), preset, starts, fingerprint: config.fingerprint() })
}

pub fn schedule(s: &ScheduleSpec) -> Result<StepSchedule<f64>, CliError> {
    Ok(match *s {
        ScheduleSpec::Harmonic { c } => StepSchedule::harmonic(c)?,
        ScheduleSpec::PowerLaw { c, alpha } => StepSchedule::power_law(c, alpha)?,
    })
}

fn bias(b: &BiasSpec, d: usize) -> Result<BiasModel<f64>, CliError> {
    Ok(match *b {
        BiasSpec::Zero => BiasModel::zero(d),
        BiasSpec::Gaussian { scale, gamma } => BiasModel::gaussian_shrinking(d, scale, gamma)?,
        BiasSpec::Constant { level } => BiasModel::constant(vec![level / (d as f64).sqrt(); d]),
    })
}

pub fn selector(s: &SelectorSpec) -> SelectorStrategy<f64> {
    match s {
        SelectorSpec::LeastNorm => SelectorStrategy::LeastNorm,
        SelectorSpec::Midpoint => SelectorStrategy::Midpoint,
        SelectorSpec::UniformVertex => SelectorStrategy::UniformVertex,
        SelectorSpec::Extreme(d) => SelectorStrategy::ExtremeVertex(d.clone()),
    }
}

fn model(m: &ModelSpec) -> Result<Preset<f64>, CliError> {
    Ok(match m {
        ModelSpec::Lasso { lambda, data } => {
            let data = match data {
                LassoSpec::Shift { shift, noise_sd } => LassoData::scalar_shift(*shift, *noise_sd),
                LassoSpec::Regression { mean_x, cov_x, theta, noise_sd } => {
                    LassoData::regression(mean_x.clone(), Matrix::from_rows(cov_x)?, theta.clone(), *noise_sd)?
                }
            };
            lasso(*lambda, data)?
        }
        ModelSpec::Pegasos { lambda, mean, cov, penalty } => {
            pegasos(*lambda, mean.clone(), Matrix::from_rows(cov)?, penalty.parse()?)?
        }
        ModelSpec::Rootfind => rootfind()?,
        ModelSpec::Nonconv => nonconvergence()?,
        ModelSpec::SignFilter { theta, regressor, noise } => {
            let regressor = match regressor {
                RegressorSpec::Constant(p) => Regressor::Constant(p.clone()),
                RegressorSpec::Gaussian { mean, cov } => {
                    Regressor::Gaussian { mean: mean.clone(), cov: Matrix::from_rows(cov)? }
                }
            };
            let noise = match *noise {
                ResidualSpec::Laplace(scale) => ResidualNoise::Laplace { scale },
                ResidualSpec::Gaussian(sd) => ResidualNoise::Gaussian { sd },
            };
            sign_filter(SignalLaw { theta: theta.clone(), regressor, noise })?
        }
        ModelSpec::Inline(d) => inline(d)?,
    })
}

fn affine_fn(a: &Affine) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static {
    let (m, c) = (a.matrix.clone(), a.offset.clone());
    move |x: &[f64]| (0..c.len()).map(|i| linalg::dot(&m[i], x) + c[i]).collect()
}

fn affine_bound(a: &Affine, radius: f64) -> f64 {
    let frob = a.matrix.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    linalg::norm(&a.offset) + frob * radius
}

/// Box on which the declared bounds of an inline drift are meant to hold.
const INLINE_RADIUS: f64 = 10.0;

fn inline(spec: &InlineDrift) -> Result<Preset<f64>, CliError> {
    let d = spec.dim;
    let surfaces: Vec<Surface<f64>> = spec.surfaces.iter().map(|(n, o)| Surface::new(n.clone(), *o)).collect();
    let signs: Vec<Vec<i8>> = spec.pieces.iter().map(|p| p.signs.clone()).collect();
    let forms: Vec<_> = spec.pieces.iter().map(|p| affine_fn(&p.field)).collect();
    let surf = surfaces.clone();
    let field = PiecewiseField::new(
        d,
        d,
        surfaces,
        move |x: &[f64]| {
            let s: Vec<i8> = surf.iter().map(|h| h.side(x, 0.0)).collect();
            if s.contains(&0) {
                return None;
            }
            signs.iter().position(|p| *p == s)
        },
        move |i, x| forms[i](x),
    );
    let g = field.krasovskii_map("inline drift", spec.bound);
    let mut drift = Drift::new(d).with_map(g.clone());
    let mut problem_zeta = NoiseModel::none(0);
    let mean_field = match &spec.smooth {
        Some(a) => {
            let f = affine_fn(a);
            let (f1, f2) = (f.clone(), f.clone());
            let sd = spec.noise_sd;
            drift = drift
                .with_smooth(move |w, z| {
                    let mut v = f1(w);
                    if sd > 0.0 {
                        linalg::axpy(sd, z, &mut v);
                    }
                    v
                })
                .with_mean(move |w| f2(w));
            if sd > 0.0 {
                problem_zeta = NoiseModel::standard_gaussian(d);
            }
            let hbar: VectorField<f64> = Arc::new(f);
            g.plus_field(hbar, affine_bound(a, INLINE_RADIUS * (d as f64).sqrt()))
        }
        None => g,
    };
    let problem = Problem::new(drift, StepSchedule::power_law(1.0, 0.5)?).with_zeta(problem_zeta);
    if spec.pieces.iter().any(|p| p.signs.len() != spec.surfaces.len()) {
        return Err(CliError::Setup("every inline piece needs one sign per surface".into()));
    }
    Ok(Preset {
        name: "inline".into(),
        problem,
        x0: vec![0.0; d],
        x_star: spec.x_star.clone(),
        roots: spec.x_star.clone().into_iter().collect(),
        note: "piecewise-affine drift from the config file".into(),
        mean_field,
        lyapunov: None,
        audit_box: (vec![-INLINE_RADIUS; d], vec![INLINE_RADIUS; d]),
        warnings: Vec::new(),
    })
}
