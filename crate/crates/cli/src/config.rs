//! Experiment files: strict JSON, validated in one pass so that every problem
//! is reported together, each with the path of the offending field.

use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LassoSpec {
    /// `h = b + ξ − w`, `ξ ~ N(0, sd²)`.
    Shift { shift: f64, noise_sd: f64 },
    /// `y = xᵀθ + ε` with `x ~ N(mean_x, cov_x)`, `ε ~ N(0, sd²)`.
    Regression { mean_x: Vec<f64>, cov_x: Vec<Vec<f64>>, theta: Vec<f64>, noise_sd: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegressorSpec {
    Constant(Vec<f64>),
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResidualSpec {
    Laplace(f64),
    Gaussian(f64),
}

/// Affine field `x ↦ Mx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InlinePiece {
    /// Required side (±1) of every declared surface.
    pub signs: Vec<i8>,
    pub field: Affine,
}

/// Piecewise-affine drift on the cells cut out by hyperplanes; the set-valued
/// part is its Krasovskii regularization.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineDrift {
    pub dim: usize,
    pub surfaces: Vec<(Vec<f64>, f64)>,
    pub pieces: Vec<InlinePiece>,
    pub bound: f64,
    pub smooth: Option<Affine>,
    /// Standard deviation of additive Gaussian noise in the smooth part.
    pub noise_sd: f64,
    pub x_star: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Lasso { lambda: f64, data: LassoSpec },
    Pegasos { lambda: f64, mean: Vec<f64>, cov: Vec<Vec<f64>>, penalty: String },
    Rootfind,
    SignFilter { theta: Vec<f64>, regressor: RegressorSpec, noise: ResidualSpec },
    Nonconv,
    Inline(InlineDrift),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Harmonic { c: f64 },
    PowerLaw { c: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BiasSpec {
    Zero,
    /// `N(0, cₙ I)`, `cₙ = scale (n+1)^(−gamma)`.
    Gaussian { scale: f64, gamma: f64 },
    /// Constant vector of norm `level` along `(1, …, 1)`.
    Constant { level: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectorSpec {
    LeastNorm,
    Midpoint,
    UniformVertex,
    Extreme(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    /// Replications whose full trajectory is written (for every start).
    pub trajectories: Vec<u64>,
    pub normalized: bool,
    pub certificate: bool,
    pub tightness: bool,
    pub sdi_comparison: bool,
    pub chain: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiSpec {
    pub dt: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdiSpec {
    pub a: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    /// `None` picks the classical pairing from the step schedule.
    pub half_identity: Option<bool>,
    pub dt: f64,
    pub t_eval: f64,
    pub replications: Option<usize>,
    pub u0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub probes: Vec<Vec<f64>>,
    pub eps: f64,
    pub t_min: f64,
    pub dt: f64,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessSpec {
    pub kappa: f64,
    pub checkpoints: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub root: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub starts: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    pub replications: usize,
    pub seed: u64,
    pub schedule: Option<ScheduleSpec>,
    pub bias: Option<BiasSpec>,
    pub projection: Option<ProjectionSpec>,
    pub selector: Option<SelectorSpec>,
    pub checkpoint_every: Option<usize>,
    pub outputs: Outputs,
    pub di: DiSpec,
    pub sdi: Option<SdiSpec>,
    pub chain: Option<ChainSpec>,
    pub tightness: TightnessSpec,
    pub tolerances: Tolerances,
    /// The validated document, source of the fingerprint and of sweeps.
    pub raw: Value,
}

pub const PRESETS: [&str; 5] = ["lasso", "pegasos", "rootfind", "sign_filter", "nonconv"];

const TOP_KEYS: &[&str] = &[
    "name",
    "preset",
    "params",
    "drift",
    "x0",
    "starts",
    "iterations",
    "replications",
    "seed",
    "schedule",
    "bias",
    "projection",
    "selector",
    "checkpoint_every",
    "outputs",
    "di",
    "sdi",
    "chain",
    "tightness",
    "tolerances",
];

/// Reads and validates an experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
    parse_value(value)
}

pub fn parse_value(value: Value) -> Result<ExperimentConfig, CliError> {
    let mut cx = Checker::default();
    let cfg = parse_root(&mut cx, &value);
    match cfg {
        Some(c) if cx.errors.is_empty() => Ok(ExperimentConfig { raw: value, ..c }),
        _ => Err(CliError::Invalid(cx.errors)),
    }
}

/// First 16 hex digits of the SHA-256 of the canonical (key-sorted, compact)
/// JSON serialization.
pub fn fingerprint(value: &Value) -> String {
    let canonical = serde_json::to_string(value).expect("JSON values serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.raw)
    }

    /// Same experiment with another seed (and fingerprint).
    pub fn with_seed(&self, seed: u64) -> Result<Self, CliError> {
        let mut raw = self.raw.clone();
        raw["seed"] = Value::from(seed);
        parse_value(raw)
    }

    /// Same experiment with the scalar at the dotted `path` replaced.
    pub fn with_scalar(&self, path: &str, v: f64) -> Result<Self, CliError> {
        let mut raw = self.raw.clone();
        let mut cur = &mut raw;
        for part in path.split('.') {
            cur = match cur {
                Value::Object(m) => m.get_mut(part),
                Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| CliError::Sweep(format!("{path} does not address a field of the config")))?;
        }
        match cur {
            Value::Number(n) => {
                *cur = if n.is_f64() || v.fract() != 0.0 || v < 0.0 {
                    serde_json::Number::from_f64(v)
                        .map(Value::Number)
                        .ok_or_else(|| CliError::Sweep(format!("{v} is not a finite number")))?
                } else {
                    Value::from(v as u64)
                };
            }
            other => {
                return Err(CliError::Sweep(format!(
                    "{path} addresses a non-scalar value ({})",
                    kind(other)
                )))
            }
        }
        parse_value(raw)
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[derive(Default)]
struct Checker {
    errors: Vec<ConfigError>,
}

impl Checker {
    fn err(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { path: path.to_string(), message: message.into() });
    }

    fn object<'a>(&mut self, path: &str, v: &'a Value, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Value::Object(m) = v else {
            self.err(path, format!("expected an object, found {}", kind(v)));
            return None;
        };
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&join(path, k), "unknown key");
            }
        }
        Some(m)
    }

    fn num(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, format!("expected a number, found {}", kind(v)));
                None
            }
        }
    }

    fn positive(&mut self, path: &str, v: &Value) -> Option<f64> {
        let x = self.num(path, v)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.err(path, format!("must be > 0, got {x}"));
            None
        }
    }

    fn nonneg(&mut self, path: &str, v: &Value) -> Option<f64> {
        let x = self.num(path, v)?;
        if x >= 0.0 {
            Some(x)
        } else {
            self.err(path, format!("must be >= 0, got {x}"));
            None
        }
    }

    fn uint(&mut self, path: &str, v: &Value) -> Option<u64> {
        let r = v.as_u64();
        if r.is_none() {
            self.err(path, format!("expected a nonnegative integer, found {}", describe(v)));
        }
        r
    }

    fn count(&mut self, path: &str, v: &Value) -> Option<usize> {
        let n = self.uint(path, v)?;
        if n == 0 {
            self.err(path, "must be >= 1");
            return None;
        }
        usize::try_from(n).ok()
    }

    fn boolean(&mut self, path: &str, v: &Value) -> Option<bool> {
        let r = v.as_bool();
        if r.is_none() {
            self.err(path, format!("expected a boolean, found {}", kind(v)));
        }
        r
    }

    fn string<'a>(&mut self, path: &str, v: &'a Value) -> Option<&'a str> {
        let r = v.as_str();
        if r.is_none() {
            self.err(path, format!("expected a string, found {}", kind(v)));
        }
        r
    }

    fn vector(&mut self, path: &str, v: &Value) -> Option<Vec<f64>> {
        let Value::Array(a) = v else {
            self.err(path, format!("expected an array of numbers, found {}", kind(v)));
            return None;
        };
        if a.is_empty() {
            self.err(path, "must not be empty");
            return None;
        }
        let out: Vec<Option<f64>> = a.iter().enumerate().map(|(i, x)| self.num(&format!("{path}[{i}]"), x)).collect();
        out.into_iter().collect()
    }

    fn vectors(&mut self, path: &str, v: &Value) -> Option<Vec<Vec<f64>>> {
        let Value::Array(a) = v else {
            self.err(path, format!("expected an array of arrays, found {}", kind(v)));
            return None;
        };
        if a.is_empty() {
            self.err(path, "must not be empty");
            return None;
        }
        let out: Vec<Option<Vec<f64>>> =
            a.iter().enumerate().map(|(i, x)| self.vector(&format!("{path}[{i}]"), x)).collect();
        out.into_iter().collect()
    }

    fn matrix(&mut self, path: &str, v: &Value) -> Option<Vec<Vec<f64>>> {
        let rows = self.vectors(path, v)?;
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            self.err(path, "rows must have equal length");
            return None;
        }
        Some(rows)
    }

    fn square(&mut self, path: &str, v: &Value, dim: Option<usize>) -> Option<Vec<Vec<f64>>> {
        let m = self.matrix(path, v)?;
        if m.len() != m[0].len() {
            self.err(path, format!("must be square, got {}×{}", m.len(), m[0].len()));
            return None;
        }
        if let Some(d) = dim.filter(|&d| d != m.len()) {
            self.err(path, format!("must be {d}×{d}, got {}×{}", m.len(), m.len()));
            return None;
        }
        Some(m)
    }

    fn vector_of_len(&mut self, path: &str, v: &Value, dim: Option<usize>) -> Option<Vec<f64>> {
        let x = self.vector(path, v)?;
        if let Some(d) = dim.filter(|&d| d != x.len()) {
            self.err(path, format!("must have length {d}, got {}", x.len()));
            return None;
        }
        Some(x)
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Number(n) => format!("number {n}"),
        other => kind(other).to_string(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn parse_root(cx: &mut Checker, v: &Value) -> Option<ExperimentConfig> {
    let m = cx.object("", v, TOP_KEYS)?;
    let name = match m.get("name") {
        Some(n) => cx.string("name", n).unwrap_or_default().to_string(),
        None => String::new(),
    };
    let model = match (m.get("preset"), m.get("drift")) {
        (Some(_), Some(_)) => {
            cx.err("drift", "give either preset or drift, not both");
            None
        }
        (None, None) => {
            cx.err("preset", "required (or an inline drift)");
            None
        }
        (Some(p), None) => parse_preset(cx, p, m.get("params")),
        (None, Some(d)) => {
            if m.contains_key("params") {
                cx.err("params", "only valid together with a preset");
            }
            parse_inline(cx, d).map(ModelSpec::Inline)
        }
    };
    let dim = model.as_ref().and_then(model_dim);
    let required = |cx: &mut Checker, key: &str| {
        let r = m.get(key);
        if r.is_none() {
            cx.err(key, "required");
        }
        r
    };
    let iterations = required(cx, "iterations").and_then(|v| cx.count("iterations", v));
    let replications = required(cx, "replications").and_then(|v| cx.count("replications", v));
    let seed = required(cx, "seed").and_then(|v| cx.uint("seed", v));
    let starts = match (m.get("x0"), m.get("starts")) {
        (Some(_), Some(_)) => {
            cx.err("starts", "give either x0 or starts, not both");
            None
        }
        (Some(x), None) => cx.vector_of_len("x0", x, dim).map(|x| Some(vec![x])),
        (None, Some(s)) => {
            let v = cx.vectors("starts", s);
            if let (Some(v), Some(d)) = (&v, dim) {
                for (i, x) in v.iter().enumerate() {
                    if x.len() != d {
                        cx.err(&format!("starts[{i}]"), format!("must have length {d}, got {}", x.len()));
                    }
                }
            }
            v.map(Some)
        }
        (None, None) => Some(None),
    };
    let schedule = opt(m, "schedule", |v| parse_schedule(cx, v));
    let bias = opt(m, "bias", |v| parse_bias(cx, v));
    let projection = opt(m, "projection", |v| parse_projection(cx, v, dim));
    let selector = opt(m, "selector", |v| parse_selector(cx, v, dim));
    let checkpoint_every = opt(m, "checkpoint_every", |v| cx.count("checkpoint_every", v));
    let outputs = match m.get("outputs") {
        Some(v) => parse_outputs(cx, v),
        None => Some(Outputs::default()),
    };
    let di = parse_di(cx, m.get("di"));
    let sdi = opt(m, "sdi", |v| parse_sdi(cx, v, dim));
    let chain = opt(m, "chain", |v| parse_chain(cx, v, dim));
    let tightness = parse_tightness(cx, m.get("tightness"));
    let tolerances = parse_tolerances(cx, m.get("tolerances"));
    if let Some(o) = &outputs {
        if o.chain && m.get("chain").is_none() {
            cx.err("outputs.chain", "requires a chain section");
        }
        if o.sdi_comparison && m.get("sdi").is_none() {
            cx.err("outputs.sdi_comparison", "requires an sdi section");
        }
    }
    Some(ExperimentConfig {
        name,
        model: model?,
        starts: starts?,
        iterations: iterations?,
        replications: replications?,
        seed: seed?,
        schedule: schedule?,
        bias: bias?,
        projection: projection?,
        selector: selector?,
        checkpoint_every: checkpoint_every?,
        outputs: outputs?,
        di: di?,
        sdi: sdi?,
        chain: chain?,
        tightness: tightness?,
        tolerances: tolerances?,
        raw: Value::Null,
    })
}

/// `Some(None)` when absent, `Some(Some(x))` when valid, `None` when invalid.
fn opt<T>(m: &Map<String, Value>, key: &str, f: impl FnOnce(&Value) -> Option<T>) -> Option<Option<T>> {
    match m.get(key) {
        None => Some(None),
        Some(v) => f(v).map(Some),
    }
}

fn model_dim(m: &ModelSpec) -> Option<usize> {
    match m {
        ModelSpec::Lasso { data: LassoSpec::Shift { .. }, .. } => Some(1),
        ModelSpec::Lasso { data: LassoSpec::Regression { theta, .. }, .. } => Some(theta.len()),
        ModelSpec::Pegasos { mean, .. } => Some(mean.len()),
        ModelSpec::Rootfind | ModelSpec::Nonconv => Some(2),
        ModelSpec::SignFilter { theta, .. } => Some(theta.len()),
        ModelSpec::Inline(d) => Some(d.dim),
    }
}

fn empty() -> Value {
    Value::Object(Map::new())
}

fn parse_preset(cx: &mut Checker, p: &Value, params: Option<&Value>) -> Option<ModelSpec> {
    let name = cx.string("preset", p)?;
    let e = empty();
    let params = params.unwrap_or(&e);
    let get = |m: &Map<String, Value>, k: &str| m.get(k).cloned();
    match name {
        "lasso" => {
            let m = cx.object("params", params, &["lambda", "shift", "noise_sd", "regression"])?;
            let lambda = get(m, "lambda").map_or(Some(0.7), |v| cx.nonneg("params.lambda", &v));
            let noise_sd = get(m, "noise_sd").map_or(Some(1.0), |v| cx.nonneg("params.noise_sd", &v));
            let data = match (m.get("shift"), m.get("regression")) {
                (Some(_), Some(_)) => {
                    cx.err("params.regression", "give either shift or regression, not both");
                    None
                }
                (_, Some(r)) => parse_regression(cx, r, noise_sd),
                (s, None) => {
                    let shift = s.map_or(Some(1.0), |v| cx.num("params.shift", v));
                    Some(LassoSpec::Shift { shift: shift?, noise_sd: noise_sd? })
                }
            };
            Some(ModelSpec::Lasso { lambda: lambda?, data: data? })
        }
        "pegasos" => {
            let m = cx.object("params", params, &["lambda", "mean", "cov", "penalty"])?;
            let lambda = get(m, "lambda").map_or(Some(1.0), |v| cx.positive("params.lambda", &v));
            let mean = get(m, "mean").map_or(Some(vec![1.0, 2.0]), |v| cx.vector("params.mean", &v));
            let d = mean.as_ref().map(Vec::len);
            let cov = match m.get("cov") {
                Some(v) => cx.square("params.cov", v, d),
                None => d.map(identity),
            };
            let penalty = match m.get("penalty") {
                Some(v) => cx.string("params.penalty", v).and_then(|s| match s {
                    "half" | "full" => Some(s.to_string()),
                    other => {
                        cx.err("params.penalty", format!("expected \"half\" or \"full\", got {other:?}"));
                        None
                    }
                }),
                None => Some("full".to_string()),
            };
            Some(ModelSpec::Pegasos { lambda: lambda?, mean: mean?, cov: cov?, penalty: penalty? })
        }
        "rootfind" | "nonconv" => {
            cx.object("params", params, &[])?;
            Some(if name == "rootfind" { ModelSpec::Rootfind } else { ModelSpec::Nonconv })
        }
        "sign_filter" => {
            let m = cx.object("params", params, &["theta", "regressor", "noise"])?;
            let theta = get(m, "theta").map_or(Some(vec![1.0]), |v| cx.vector("params.theta", &v));
            let d = theta.as_ref().map(Vec::len);
            let regressor = match m.get("regressor") {
                None => d.map(|d| RegressorSpec::Constant(vec![1.0; d])),
                Some(v) => parse_regressor(cx, v, d),
            };
            let noise = match m.get("noise") {
                None => Some(ResidualSpec::Laplace(1.0)),
                Some(v) => parse_residual(cx, v),
            };
            Some(ModelSpec::SignFilter { theta: theta?, regressor: regressor?, noise: noise? })
        }
        other => {
            cx.err("preset", format!("unknown preset {other:?}; expected one of {}", PRESETS.join(", ")));
            None
        }
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn parse_regression(cx: &mut Checker, v: &Value, noise_sd: Option<f64>) -> Option<LassoSpec> {
    let p = "params.regression";
    let m = cx.object(p, v, &["mean_x", "cov_x", "theta"])?;
    let theta = match m.get("theta") {
        Some(v) => cx.vector(&join(p, "theta"), v),
        None => {
            cx.err(&join(p, "theta"), "required");
            None
        }
    };
    let d = theta.as_ref().map(Vec::len);
    let mean_x = match m.get("mean_x") {
        Some(v) => cx.vector_of_len(&join(p, "mean_x"), v, d),
        None => d.map(|d| vec![0.0; d]),
    };
    let cov_x = match m.get("cov_x") {
        Some(v) => cx.square(&join(p, "cov_x"), v, d),
        None => d.map(identity),
    };
    Some(LassoSpec::Regression { mean_x: mean_x?, cov_x: cov_x?, theta: theta?, noise_sd: noise_sd? })
}

fn parse_regressor(cx: &mut Checker, v: &Value, d: Option<usize>) -> Option<RegressorSpec> {
    let p = "params.regressor";
    let m = cx.object(p, v, &["constant", "gaussian"])?;
    match (m.get("constant"), m.get("gaussian")) {
        (Some(c), None) => cx.vector_of_len(&join(p, "constant"), c, d).map(RegressorSpec::Constant),
        (None, Some(g)) => {
            let gp = join(p, "gaussian");
            let gm = cx.object(&gp, g, &["mean", "cov"])?;
            let mean = match gm.get("mean") {
                Some(v) => cx.vector_of_len(&join(&gp, "mean"), v, d),
                None => {
                    cx.err(&join(&gp, "mean"), "required");
                    None
                }
            };
            let cov = match gm.get("cov") {
                Some(v) => cx.square(&join(&gp, "cov"), v, d),
                None => d.map(identity),
            };
            Some(RegressorSpec::Gaussian { mean: mean?, cov: cov? })
        }
        _ => {
            cx.err(p, "expected exactly one of constant, gaussian");
            None
        }
    }
}

fn parse_residual(cx: &mut Checker, v: &Value) -> Option<ResidualSpec> {
    let p = "params.noise";
    let m = cx.object(p, v, &["laplace", "gaussian"])?;
    match (m.get("laplace"), m.get("gaussian")) {
        (Some(b), None) => cx.positive(&join(p, "laplace"), b).map(ResidualSpec::Laplace),
        (None, Some(s)) => cx.positive(&join(p, "gaussian"), s).map(ResidualSpec::Gaussian),
        _ => {
            cx.err(p, "expected exactly one of laplace, gaussian");
            None
        }
    }
}

fn parse_affine(cx: &mut Checker, path: &str, v: &Value, dim: Option<usize>) -> Option<Affine> {
    let m = cx.object(path, v, &["matrix", "offset"])?;
    let matrix = match m.get("matrix") {
        Some(v) => cx.square(&join(path, "matrix"), v, dim),
        None => dim.map(|d| vec![vec![0.0; d]; d]),
    };
    let offset = match m.get("offset") {
        Some(v) => cx.vector_of_len(&join(path, "offset"), v, dim),
        None => dim.map(|d| vec![0.0; d]),
    };
    Some(Affine { matrix: matrix?, offset: offset? })
}

fn parse_inline(cx: &mut Checker, v: &Value) -> Option<InlineDrift> {
    let p = "drift";
    let m = cx.object(p, v, &["dim", "surfaces", "pieces", "bound", "smooth", "noise_sd", "x_star"])?;
    let dim = match m.get("dim") {
        Some(v) => cx.count("drift.dim", v),
        None => {
            cx.err("drift.dim", "required");
            None
        }
    };
    let mut surfaces = Some(Vec::new());
    if let Some(s) = m.get("surfaces") {
        match s {
            Value::Array(a) => {
                for (i, sv) in a.iter().enumerate() {
                    let sp = format!("drift.surfaces[{i}]");
                    let parsed = cx.object(&sp, sv, &["normal", "offset"]).and_then(|sm| {
                        let normal = match sm.get("normal") {
                            Some(n) => cx.vector_of_len(&join(&sp, "normal"), n, dim),
                            None => {
                                cx.err(&join(&sp, "normal"), "required");
                                None
                            }
                        };
                        let offset = sm.get("offset").map_or(Some(0.0), |o| cx.num(&join(&sp, "offset"), o));
                        Some((normal?, offset?))
                    });
                    match (parsed, surfaces.as_mut()) {
                        (Some(x), Some(v)) => v.push(x),
                        _ => surfaces = None,
                    }
                }
            }
            other => {
                cx.err("drift.surfaces", format!("expected an array, found {}", kind(other)));
                surfaces = None;
            }
        }
    }
    let n_surf = surfaces.as_ref().map(Vec::len);
    let mut pieces = Some(Vec::new());
    match m.get("pieces") {
        Some(Value::Array(a)) if !a.is_empty() => {
            for (i, pv) in a.iter().enumerate() {
                let pp = format!("drift.pieces[{i}]");
                let parsed = cx.object(&pp, pv, &["signs", "matrix", "offset"]).and_then(|pm| {
                    let signs = match pm.get("signs") {
                        None => Some(Vec::new()),
                        Some(s) => cx.vector(&join(&pp, "signs"), s).and_then(|s| {
                            if s.iter().any(|&x| x != 1.0 && x != -1.0) {
                                cx.err(&join(&pp, "signs"), "entries must be 1 or -1");
                                return None;
                            }
                            Some(s.into_iter().map(|x| if x > 0.0 { 1i8 } else { -1 }).collect::<Vec<_>>())
                        }),
                    };
                    if let (Some(s), Some(n)) = (&signs, n_surf) {
                        if s.len() != n {
                            cx.err(&join(&pp, "signs"), format!("must have one entry per surface ({n})"));
                        }
                    }
                    let field = parse_affine(cx, &pp, &without_signs(pm), dim);
                    Some(InlinePiece { signs: signs?, field: field? })
                });
                match (parsed, pieces.as_mut()) {
                    (Some(x), Some(v)) => v.push(x),
                    _ => pieces = None,
                }
            }
        }
        Some(_) => {
            cx.err("drift.pieces", "expected a non-empty array");
            pieces = None;
        }
        None => {
            cx.err("drift.pieces", "required");
            pieces = None;
        }
    }
    let bound = match m.get("bound") {
        Some(b) => cx.positive("drift.bound", b),
        None => {
            cx.err("drift.bound", "required (common bound of the set-valued part)");
            None
        }
    };
    let smooth = opt(m, "smooth", |v| parse_affine(cx, "drift.smooth", v, dim));
    let noise_sd = m.get("noise_sd").map_or(Some(0.0), |v| cx.nonneg("drift.noise_sd", v));
    let x_star = opt(m, "x_star", |v| cx.vector_of_len("drift.x_star", v, dim));
    Some(InlineDrift {
        dim: dim?,
        surfaces: surfaces?,
        pieces: pieces?,
        bound: bound?,
        smooth: smooth?,
        noise_sd: noise_sd?,
        x_star: x_star?,
    })
}

fn without_signs(m: &Map<String, Value>) -> Value {
    let mut c = m.clone();
    c.remove("signs");
    Value::Object(c)
}

fn kind_of<'a>(cx: &mut Checker, path: &str, m: &'a Map<String, Value>) -> Option<&'a str> {
    match m.get("kind") {
        Some(k) => cx.string(&join(path, "kind"), k),
        None => {
            cx.err(&join(path, "kind"), "required");
            None
        }
    }
}

fn parse_schedule(cx: &mut Checker, v: &Value) -> Option<ScheduleSpec> {
    let m = cx.object("schedule", v, &["kind", "c", "alpha"])?;
    let c = m.get("c").map_or(Some(1.0), |v| cx.positive("schedule.c", v));
    match kind_of(cx, "schedule", m)? {
        "harmonic" => {
            if m.contains_key("alpha") {
                cx.err("schedule.alpha", "not used by a harmonic schedule");
            }
            Some(ScheduleSpec::Harmonic { c: c? })
        }
        "power_law" => {
            let alpha = match m.get("alpha") {
                Some(a) => cx.num("schedule.alpha", a).and_then(|a| {
                    if a > 0.0 && a <= 1.0 {
                        Some(a)
                    } else {
                        cx.err("schedule.alpha", format!("must lie in (0, 1], got {a}"));
                        None
                    }
                }),
                None => {
                    cx.err("schedule.alpha", "required");
                    None
                }
            };
            Some(ScheduleSpec::PowerLaw { c: c?, alpha: alpha? })
        }
        other => {
            cx.err("schedule.kind", format!("expected \"harmonic\" or \"power_law\", got {other:?}"));
            None
        }
    }
}

fn parse_bias(cx: &mut Checker, v: &Value) -> Option<BiasSpec> {
    let m = cx.object("bias", v, &["kind", "scale", "gamma", "level"])?;
    let k = kind_of(cx, "bias", m)?;
    let allowed: &[&str] = match k {
        "zero" => &[],
        "gaussian" => &["scale", "gamma"],
        "constant" => &["level"],
        other => {
            cx.err("bias.kind", format!("expected \"zero\", \"gaussian\" or \"constant\", got {other:?}"));
            return None;
        }
    };
    for key in m.keys().filter(|k| *k != "kind" && !allowed.contains(&k.as_str())) {
        cx.err(&join("bias", key), format!("not used by {k} bias"));
    }
    match k {
        "zero" => Some(BiasSpec::Zero),
        "gaussian" => {
            let scale = m.get("scale").map_or(Some(1.0), |v| cx.nonneg("bias.scale", v));
            let gamma = m.get("gamma").map_or(Some(1.0), |v| cx.nonneg("bias.gamma", v));
            Some(BiasSpec::Gaussian { scale: scale?, gamma: gamma? })
        }
        _ => {
            let level = match m.get("level") {
                Some(v) => cx.nonneg("bias.level", v),
                None => {
                    cx.err("bias.level", "required");
                    None
                }
            };
            Some(BiasSpec::Constant { level: level? })
        }
    }
}

fn parse_projection(cx: &mut Checker, v: &Value, dim: Option<usize>) -> Option<ProjectionSpec> {
    let m = cx.object("projection", v, &["kind", "lo", "hi", "center", "radius"])?;
    let need = |cx: &mut Checker, key: &str| {
        let r = m.get(key);
        if r.is_none() {
            cx.err(&join("projection", key), "required");
        }
        r
    };
    match kind_of(cx, "projection", m)? {
        "box" => {
            let lo = need(cx, "lo").and_then(|v| cx.vector_of_len("projection.lo", v, dim));
            let hi = need(cx, "hi").and_then(|v| cx.vector_of_len("projection.hi", v, dim));
            let (lo, hi) = (lo?, hi?);
            if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| l > h) {
                cx.err("projection", "box needs lo <= hi componentwise");
                return None;
            }
            Some(ProjectionSpec::Box { lo, hi })
        }
        "ball" => {
            let center = need(cx, "center").and_then(|v| cx.vector_of_len("projection.center", v, dim));
            let radius = need(cx, "radius").and_then(|v| cx.positive("projection.radius", v));
            Some(ProjectionSpec::Ball { center: center?, radius: radius? })
        }
        other => {
            cx.err("projection.kind", format!("expected \"box\" or \"ball\", got {other:?}"));
            None
        }
    }
}

fn parse_selector(cx: &mut Checker, v: &Value, dim: Option<usize>) -> Option<SelectorSpec> {
    match v {
        Value::String(s) => match s.as_str() {
            "least_norm" => Some(SelectorSpec::LeastNorm),
            "midpoint" => Some(SelectorSpec::Midpoint),
            "uniform_vertex" => Some(SelectorSpec::UniformVertex),
            other => {
                cx.err(
                    "selector",
                    format!("expected \"least_norm\", \"midpoint\", \"uniform_vertex\" or {{\"extreme\": [...]}}, got {other:?}"),
                );
                None
            }
        },
        other => {
            let m = cx.object("selector", other, &["extreme"])?;
            match m.get("extreme") {
                Some(d) => cx.vector_of_len("selector.extreme", d, dim).map(SelectorSpec::Extreme),
                None => {
                    cx.err("selector.extreme", "required");
                    None
                }
            }
        }
    }
}

fn parse_outputs(cx: &mut Checker, v: &Value) -> Option<Outputs> {
    let m = cx.object(
        "outputs",
        v,
        &["trajectories", "normalized", "certificate", "tightness", "sdi_comparison", "chain"],
    )?;
    let flag = |cx: &mut Checker, k: &str| m.get(k).map_or(Some(false), |v| cx.boolean(&join("outputs", k), v));
    let trajectories = match m.get("trajectories") {
        None => Some(Vec::new()),
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(i, x)| cx.uint(&format!("outputs.trajectories[{i}]"), x))
            .collect::<Vec<_>>()
            .into_iter()
            .collect(),
        Some(other) => {
            cx.err("outputs.trajectories", format!("expected an array of replication ids, found {}", kind(other)));
            None
        }
    };
    let normalized = flag(cx, "normalized");
    let certificate = flag(cx, "certificate");
    let tightness = flag(cx, "tightness");
    let sdi_comparison = flag(cx, "sdi_comparison");
    let chain = flag(cx, "chain");
    Some(Outputs {
        trajectories: trajectories?,
        normalized: normalized?,
        certificate: certificate?,
        tightness: tightness?,
        sdi_comparison: sdi_comparison?,
        chain: chain?,
    })
}

fn parse_di(cx: &mut Checker, v: Option<&Value>) -> Option<DiSpec> {
    let e = empty();
    let m = cx.object("di", v.unwrap_or(&e), &["dt", "horizon"])?;
    let dt = m.get("dt").map_or(Some(1e-3), |v| cx.positive("di.dt", v));
    let horizon = m.get("horizon").map_or(Some(10.0), |v| cx.positive("di.horizon", v));
    Some(DiSpec { dt: dt?, horizon: horizon? })
}

fn parse_sdi(cx: &mut Checker, v: &Value, dim: Option<usize>) -> Option<SdiSpec> {
    let m = cx.object("sdi", v, &["a", "sigma", "half_identity", "dt", "t_eval", "replications", "u0"])?;
    let a = match m.get("a") {
        Some(v) => cx.square("sdi.a", v, dim),
        None => {
            cx.err("sdi.a", "required");
            None
        }
    };
    let d = dim.or(a.as_ref().map(Vec::len));
    let sigma = match m.get("sigma") {
        Some(v) => cx.square("sdi.sigma", v, d),
        None => {
            cx.err("sdi.sigma", "required");
            None
        }
    };
    let half_identity = match m.get("half_identity") {
        None => Some(None),
        Some(Value::String(s)) if s == "auto" => Some(None),
        Some(v) => cx.boolean("sdi.half_identity", v).map(Some),
    };
    let dt = m.get("dt").map_or(Some(1e-2), |v| cx.positive("sdi.dt", v));
    let t_eval = m.get("t_eval").map_or(Some(5.0), |v| cx.positive("sdi.t_eval", v));
    let replications = opt(m, "replications", |v| cx.count("sdi.replications", v));
    let u0 = opt(m, "u0", |v| cx.vector_of_len("sdi.u0", v, d));
    Some(SdiSpec {
        a: a?,
        sigma: sigma?,
        half_identity: half_identity?,
        dt: dt?,
        t_eval: t_eval?,
        replications: replications?,
        u0: u0?,
    })
}

fn parse_chain(cx: &mut Checker, v: &Value, dim: Option<usize>) -> Option<ChainSpec> {
    let m = cx.object("chain", v, &["probes", "eps", "t_min", "dt", "budget"])?;
    let probes = match m.get("probes") {
        Some(p) => cx.vectors("chain.probes", p).and_then(|ps| {
            if let Some(d) = dim {
                if ps.iter().any(|p| p.len() != d) {
                    cx.err("chain.probes", format!("every probe must have length {d}"));
                    return None;
                }
            }
            Some(ps)
        }),
        None => {
            cx.err("chain.probes", "required");
            None
        }
    };
    let eps = m.get("eps").map_or(Some(0.1), |v| cx.positive("chain.eps", v));
    let t_min = m.get("t_min").map_or(Some(1.0), |v| cx.positive("chain.t_min", v));
    let dt = m.get("dt").map_or(Some(1e-2), |v| cx.positive("chain.dt", v));
    let budget = m.get("budget").map_or(Some(20_000), |v| cx.count("chain.budget", v));
    Some(ChainSpec { probes: probes?, eps: eps?, t_min: t_min?, dt: dt?, budget: budget? })
}

fn parse_tightness(cx: &mut Checker, v: Option<&Value>) -> Option<TightnessSpec> {
    let e = empty();
    let m = cx.object("tightness", v.unwrap_or(&e), &["kappa", "checkpoints"])?;
    let kappa = match m.get("kappa") {
        None => Some(0.05),
        Some(v) => cx.num("tightness.kappa", v).and_then(|k| {
            if k > 0.0 && k < 1.0 {
                Some(k)
            } else {
                cx.err("tightness.kappa", format!("must lie in (0, 1), got {k}"));
                None
            }
        }),
    };
    let checkpoints = m.get("checkpoints").map_or(Some(8), |v| cx.count("tightness.checkpoints", v));
    Some(TightnessSpec { kappa: kappa?, checkpoints: checkpoints? })
}

fn parse_tolerances(cx: &mut Checker, v: Option<&Value>) -> Option<Tolerances> {
    let e = empty();
    let m = cx.object("tolerances", v.unwrap_or(&e), &["root"])?;
    let root = m.get("root").map_or(Some(sadi::apps::ROOT_TOL), |v| cx.positive("tolerances.root", v));
    Some(Tolerances { root: root? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<ConfigError> {
        match parse_str(text) {
            Err(CliError::Invalid(e)) => e,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_lasso_parses() {
        let c = parse_str(r#"{"preset": "lasso", "iterations": 10, "replications": 1, "seed": 1}"#).unwrap();
        assert_eq!(c.iterations, 10);
        assert_eq!(c.model, ModelSpec::Lasso { lambda: 0.7, data: LassoSpec::Shift { shift: 1.0, noise_sd: 1.0 } });
    }

    #[test]
    fn zero_iterations_names_the_field() {
        let e = errors(r#"{"preset": "lasso", "iterations": 0, "replications": 1, "seed": 1}"#);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].path, "iterations");
    }

    #[test]
    fn all_errors_are_collected() {
        let e = errors(
            r#"{"preset": "lasso", "iterations": 0, "replications": "many", "colour": 1,
                "params": {"lambda": -1}, "schedule": {"kind": "power_law", "alpha": 2}}"#,
        );
        let paths: Vec<&str> = e.iter().map(|e| e.path.as_str()).collect();
        for p in ["colour", "params.lambda", "iterations", "replications", "seed", "schedule.alpha"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn dimensions_checked_against_preset() {
        let e = errors(r#"{"preset": "rootfind", "iterations": 1, "replications": 1, "seed": 1, "x0": [1]}"#);
        assert_eq!(e[0].path, "x0");
        let e = errors(
            r#"{"preset": "rootfind", "iterations": 1, "replications": 1, "seed": 1, "starts": [[1, 1], [2]]}"#,
        );
        assert_eq!(e[0].path, "starts[1]");
    }

    #[test]
    fn fingerprint_ignores_key_order_and_whitespace() {
        let a = parse_str(r#"{"preset":"lasso","iterations":10,"replications":1,"seed":1}"#).unwrap();
        let b = parse_str("{\n \"seed\": 1, \"replications\": 1,\n \"iterations\": 10, \"preset\": \"lasso\"}").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
        assert_ne!(a.fingerprint(), a.with_seed(2).unwrap().fingerprint());
    }

    #[test]
    fn scalar_paths() {
        let c = parse_str(
            r#"{"preset":"lasso","iterations":10,"replications":1,"seed":1,"bias":{"kind":"constant","level":0}}"#,
        )
        .unwrap();
        let s = c.with_scalar("bias.level", 0.25).unwrap();
        assert_eq!(s.bias, Some(BiasSpec::Constant { level: 0.25 }));
        assert_eq!(c.with_scalar("iterations", 20.0).unwrap().iterations, 20);
        assert!(matches!(c.with_scalar("bias", 1.0), Err(CliError::Sweep(_))));
        assert!(matches!(c.with_scalar("bias.nothing", 1.0), Err(CliError::Sweep(_))));
    }

    #[test]
    fn inline_drift_parses() {
        let c = parse_str(
            r#"{"drift": {"dim": 1, "surfaces": [{"normal": [1]}], "bound": 1,
                 "pieces": [{"signs": [1], "offset": [-1]}, {"signs": [-1], "offset": [1]}]},
                "iterations": 5, "replications": 1, "seed": 0}"#,
        )
        .unwrap();
        let ModelSpec::Inline(d) = c.model else { panic!() };
        assert_eq!(d.pieces.len(), 2);
        assert_eq!(d.pieces[1].field.offset, vec![1.0]);
    }
}
