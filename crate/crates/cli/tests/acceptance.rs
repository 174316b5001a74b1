//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one `PASS`/`FAIL` line; exits non-zero if any fail.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sadi::apps::ANNULUS_REGIONS;
use sadi::inclusion::integrate;
use sadi::lyapunov::{clarke_gradient, u_generalized_derivative, Derivative, PiecewiseSmoothScalarFn};
use sadi::rates::{normalize, tightness_diagnostic, TightnessTrend};
use sadi::sa::{RecordMode, StepSchedule, Trajectory};
use sadi::setvalued::{ConvexSet, PiecewiseField, SelectorStrategy, SetValuedMap, VectorField};
use sadi_cli::commands::{certify, simulate_sdi};
use sadi_cli::{build, parse_config, run_experiment, sweep, with_threads, AggregateReport, Experiment};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"))
}

fn experiment(name: &str) -> Result<Experiment, String> {
    let cfg = parse_config(&config_path(name)).map_err(|e| e.to_string())?;
    build(&cfg).map_err(|e| e.to_string())
}

fn run(name: &str) -> Result<AggregateReport, String> {
    let exp = experiment(name)?;
    run_experiment(&exp).map(|r| r.0).map_err(|e| e.to_string())
}

fn final_error(r: &AggregateReport, start: usize) -> f64 {
    r.starts[start].final_stats().error_of_mean
}

fn final_mean(r: &AggregateReport, start: usize) -> Vec<f64> {
    r.starts[start].final_stats().mean.clone()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lasso_table() -> Outcome {
    let e1 = final_error(&run("lasso_bias_harmonic")?, 0);
    let e2 = final_error(&run("lasso_far_start")?, 0);
    let e4 = final_error(&run("lasso_bias_constant_unit")?, 0);
    let e5 = final_error(&run("lasso_bias_constant_ten")?, 0);
    let checks = [
        e1 <= 5e-3,
        e2 <= 5e-3,
        e4 <= 3e-2,
        (0.1..=0.8).contains(&e5),
        e1 <= e4 && e4 <= e5,
    ];
    verdict(
        checks.iter().all(|&c| c),
        format!(
            "decaying bias {e1:.3e} (≤5e-3), far start {e2:.3e} (≤5e-3), unit bias {e4:.3e} (≤3e-2), bias ten {e5:.3e} (∈[0.1,0.8]), monotone {}",
            checks[4]
        ),
    )
}

fn within(mean: &[f64], target: &[f64], tol: f64) -> bool {
    mean.iter().zip(target).all(|(m, t)| (m - t).abs() <= tol)
}

fn pegasos_mean() -> Outcome {
    let m = final_mean(&run("pegasos_gaussian_features")?, 0);
    verdict(within(&m, &[0.2, 0.4], 0.05), format!("mean {m:.4?} vs (0.2, 0.4), tol 0.05"))
}

fn rootfind_mean() -> Outcome {
    let r = run("rootfind_two_starts")?;
    let (m0, m1) = (final_mean(&r, 0), final_mean(&r, 1));
    verdict(
        within(&m0, &[0.0, 0.0], 0.05) && within(&m1, &[0.0, 0.0], 0.05),
        format!("from (1,1): {m0:.4?}; from (10,-20): {m1:.4?}; tol 0.05"),
    )
}

fn nonconvergence() -> Outcome {
    let exp = experiment("nonconv_annulus")?;
    let c = &exp.config;
    let every = c.checkpoint_every.ok_or("checkpoint_every missing")?;
    let tr = exp
        .preset
        .problem
        .run(&exp.starts[0], c.iterations, c.seed, 0, 0, RecordMode::Iterates)
        .map_err(|e| e.to_string())?;
    let roots = &exp.preset.roots;
    let near = |x: &[f64]| roots.iter().any(|r| sadi::linalg::dist(x, r) <= 0.1);
    let checkpoints: Vec<&[f64]> = (1..=c.iterations / every).map(|k| tr.iterate(k * every).expect("recorded")).collect();
    let frac = checkpoints.iter().filter(|x| near(x)).count() as f64 / checkpoints.len() as f64;
    let map = &exp.preset.mean_field;
    let mut seen = [false; 4];
    for x in tr.iterates() {
        let i = map.region_index(x);
        if let Some(k) = ANNULUS_REGIONS.iter().position(|&r| r == i) {
            seen[k] = true;
        }
    }
    let visited = seen.iter().filter(|&&s| s).count();
    verdict(
        frac <= 0.3 && visited >= 3,
        format!("{} checkpoints, fraction near a root {frac:.2} (≤0.3), annular regions visited {visited}/4 (≥3)", checkpoints.len()),
    )
}

fn calculus_oracles() -> Outcome {
    let e = |e: sadi::Error| e.to_string();
    let k = PiecewiseField::<f64>::negative_sign().krasovskii(&[0.0]).map_err(e)?;
    let sign_ok = k == ConvexSet::interval(-1.0, 1.0).map_err(e)?;
    let g = clarke_gradient(&PiecewiseSmoothScalarFn::<f64>::positive_part_1d(), &[0.0]).map_err(e)?;
    let kink_ok = g == ConvexSet::interval(0.0, 1.0).map_err(e)?;
    let v = PiecewiseSmoothScalarFn::squared_norm(1);
    let u = PiecewiseSmoothScalarFn::positive_part_1d();
    let map = PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0);
    let mut exact = 0;
    for i in 0..100 {
        let x = -2.0 + 4.0 * i as f64 / 99.0;
        let expect = if x > 0.0 {
            -2.0 * x
        } else if x < 0.0 {
            2.0 * x
        } else {
            0.0
        };
        let d = u_generalized_derivative(&v, std::slice::from_ref(&u), &map, &[x]).map_err(e)?;
        if d == Derivative::Finite(expect) {
            exact += 1;
        }
    }
    let origin = u_generalized_derivative(&v, &[u], &map, &[0.0]).map_err(e)? == Derivative::Finite(0.0);
    verdict(
        sign_ok && kink_ok && exact == 100 && origin,
        format!("K[-sign](0) {sign_ok}, Clarke max(x,0) at 0 {kink_ok}, sliding derivative exact at {exact}/100 points, at 0 {origin}"),
    )
}

fn certificates() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["lasso_bias_harmonic", "pegasos_gaussian_features", "rootfind_two_starts"] {
        let out = certify(&experiment(name)?).map_err(|e| e.to_string())?;
        let cert = out.certificate.ok_or(format!("{name}: no Lyapunov bundle"))?;
        let m = cert.min_margin();
        ok &= out.roots_ok && m >= -1e-9;
        parts.push(format!("{name} min margin {m:.3e} over {} points", cert.records.len()));
    }
    verdict(ok, parts.join("; "))
}

fn inclusion_integrator() -> Outcome {
    let e = |e: sadi::Error| e.to_string();
    let zero = SetValuedMap::zero(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let lin: VectorField<f64> = Arc::new(|x: &[f64]| vec![-x[0]]);
    let p = integrate(&zero, Some(&lin), &[1.0], 1e-3, 5.0, &SelectorStrategy::LeastNorm, &mut rng).map_err(e)?;
    let err = (p.final_state()[0] - (-5.0f64).exp()).abs();

    let sign = PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0);
    let dt = 1e-3f64;
    let p = integrate(&sign, None, &[1.0], dt, 3.0, &SelectorStrategy::UniformVertex, &mut rng).map_err(e)?;
    let hit = p.states.iter().position(|x| x[0].abs() <= dt).ok_or("never reached the surface")?;
    let band = p.states[hit..].iter().all(|x| x[0].abs() <= dt);

    let h: VectorField<f64> = Arc::new(|x: &[f64]| vec![-x[0] + x[0].sin()]);
    let mut end = |dt: f64| -> Result<f64, String> {
        Ok(integrate(&zero, Some(&h), &[1.0], dt, 2.0, &SelectorStrategy::LeastNorm, &mut rng).map_err(e)?.final_state()[0])
    };
    let reference = end(1e-6)?;
    let ratio = (end(1e-2)? - reference).abs() / (end(5e-3)? - reference).abs();
    verdict(
        err <= 5e-3 && band && (1.5..=2.5).contains(&ratio),
        format!("linear error {err:.2e} (≤5e-3), sliding band after step {hit} {band}, halving ratio {ratio:.3} (∈[1.5,2.5])"),
    )
}

fn rates() -> Outcome {
    let ou = experiment("ou_sdi_comparison")?;
    let (_, art) = run_experiment(&ou).map_err(|e| e.to_string())?;
    let sdi = simulate_sdi(&ou, &art.normalized).map_err(|e| e.to_string())?;
    let ks = sdi.comparisons.first().ok_or("no comparison")?.ks.iter().copied().fold(0.0, f64::max);

    let lasso = experiment("lasso_bias_harmonic")?;
    let (_, art) = run_experiment(&lasso).map_err(|e| e.to_string())?;
    let lasso_trend = art.tightness.first().ok_or("no tightness report")?.trend;

    let sched = StepSchedule::harmonic(1.0).map_err(|e| e.to_string())?;
    let offset: Vec<_> = (0..100)
        .map(|_| {
            let tr = Trajectory::from_iterates(sched.clone(), vec![vec![0.5]; 20_001])?;
            normalize(&tr, &[0.0], 0)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let offset_trend = tightness_diagnostic(&offset, 0.05, 10).map_err(|e| e.to_string())?.trend;
    verdict(
        ks <= 0.15 && lasso_trend == TightnessTrend::TightConsistent && offset_trend == TightnessTrend::Diverging,
        format!("OU KS {ks:.4} (≤0.15), lasso tightness {lasso_trend}, constant offset {offset_trend}"),
    )
}

fn bias_sweep() -> Outcome {
    let cfg = parse_config(&config_path("lasso_constant_bias_sweep")).map_err(|e| e.to_string())?;
    let etas = [0.0, 0.05, 0.1, 0.2, 0.4];
    let table = sweep(&cfg, "bias.level", &etas).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = table.rows.iter().map(|(_, r)| final_error(r, 0)).collect();
    let monotone = errs.windows(2).all(|w| w[0] <= w[1]);
    verdict(
        monotone && errs[0] <= 5e-3,
        format!("errors {:.4?} at η = {etas:?}; monotone {monotone}, η=0 {:.3e} (≤5e-3)", errs, errs[0]),
    )
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["lasso_bias_harmonic", "rootfind_two_starts", "pegasos_gaussian_features"] {
        let exp = experiment(name)?;
        let csv = |t| -> Result<String, String> {
            with_threads(Some(t), || run_experiment(&exp).map(|r| r.0.to_csv()))
                .map_err(|e| e.to_string())?
                .map_err(|e| e.to_string())
        };
        let same = csv(1)? == csv(8)?;
        ok &= same;
        parts.push(format!("{name} {}", if same { "identical" } else { "differs" }));
    }
    verdict(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("lasso bias table", lasso_table),
        ("pegasos mean", pegasos_mean),
        ("set-valued root finding", rootfind_mean),
        ("non-convergence", nonconvergence),
        ("nonsmooth calculus oracles", calculus_oracles),
        ("stability certificates", certificates),
        ("inclusion integrator", inclusion_integrator),
        ("rates and tightness", rates),
        ("constant-bias robustness", bias_sweep),
        ("thread-count determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
