use std::path::{Path, PathBuf};
use std::process::Command;

use sadi_cli::config::PRESETS;
use sadi_cli::{build, parse_config, parse_str, run_experiment, sweep, CliError};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"))
}

fn sadi(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sadi")).args(args).output().expect("binary runs")
}

fn invalid_paths(text: &str) -> Vec<String> {
    match parse_str(text) {
        Err(CliError::Invalid(errs)) => errs.into_iter().map(|e| e.path).collect(),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

const SMALL: &str = r#"{
  "name": "small",
  "preset": "lasso",
  "x0": [2.0],
  "iterations": 200,
  "replications": 40,
  "seed": 7,
  "bias": { "kind": "constant", "level": 0.1 }
}"#;

#[test]
fn minimal_config_parses() {
    let c = parse_str(r#"{"preset": "rootfind", "iterations": 5, "replications": 2, "seed": 0}"#).unwrap();
    assert_eq!((c.iterations, c.replications, c.seed), (5, 2, 0));
    let exp = build(&c).unwrap();
    assert_eq!(exp.starts, vec![vec![1.0, 1.0]]);
}

#[test]
fn shipped_configs_all_build() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        build(&cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= PRESETS.len());
}

#[test]
fn fingerprint_is_deterministic_and_order_free() {
    let a = parse_config(&config_path("lasso_bias_harmonic")).unwrap();
    let b = parse_config(&config_path("lasso_bias_harmonic")).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.fingerprint().len(), 16);

    let x = parse_str(r#"{"preset": "lasso", "iterations": 3, "replications": 1, "seed": 4}"#).unwrap();
    let y = parse_str(r#"{"seed": 4, "replications": 1, "iterations": 3, "preset": "lasso"}"#).unwrap();
    assert_eq!(x.fingerprint(), y.fingerprint());
    assert_ne!(x.fingerprint(), x.with_seed(5).unwrap().fingerprint());
}

#[test]
fn zero_iterations_is_reported_by_field() {
    let paths = invalid_paths(r#"{"preset": "lasso", "iterations": 0, "replications": 1, "seed": 1}"#);
    assert_eq!(paths, vec!["iterations"]);
    let msg = parse_str(r#"{"preset": "lasso", "iterations": 0, "replications": 1, "seed": 1}"#)
        .unwrap_err()
        .to_string();
    assert!(msg.contains("iterations"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_alongside_other_errors() {
    let paths = invalid_paths(
        r#"{"preset": "lasso", "iterations": 10, "replications": 1, "seed": 1,
            "colour": "red", "bias": {"kind": "constant", "level": 0.1, "extra": 1}}"#,
    );
    assert!(paths.iter().any(|p| p == "colour"), "{paths:?}");
    assert!(paths.iter().any(|p| p == "bias.extra"), "{paths:?}");
}

#[test]
fn single_value_sweep_matches_single_run() {
    let cfg = parse_str(SMALL).unwrap();
    let table = sweep(&cfg, "bias.level", &[0.1]).unwrap();
    let (report, _) = run_experiment(&build(&cfg).unwrap()).unwrap();
    let (v, row) = &table.rows[0];
    assert_eq!(*v, 0.1);
    assert_eq!(row.starts[0].final_stats(), report.starts[0].final_stats());
    assert_eq!(table.base_fingerprint, cfg.fingerprint());
}

#[test]
fn sweeping_a_missing_field_fails() {
    let cfg = parse_str(SMALL).unwrap();
    assert!(matches!(sweep(&cfg, "bias.nonexistent", &[1.0]), Err(CliError::Sweep(_))));
    assert!(matches!(sweep(&cfg, "bias.level", &[]), Err(CliError::Sweep(_))));
}

#[test]
fn faster_bias_decay_does_not_hurt() {
    let cfg = parse_config(&config_path("lasso_bias_harmonic")).unwrap();
    let t = sweep(&cfg, "bias.gamma", &[0.25, 1.0]).unwrap();
    let e: Vec<f64> = t.rows.iter().map(|(_, r)| r.starts[0].final_stats().error_of_mean).collect();
    assert!(e[1] <= e[0], "{e:?}");
}

fn has_provenance(path: &Path, fingerprint: &str) {
    let text = std::fs::read_to_string(path).unwrap();
    let head: Vec<&str> = text.lines().take(4).collect();
    assert!(head[0].starts_with("# sadi "), "{}: {head:?}", path.display());
    assert!(head.contains(&format!("# fingerprint: {fingerprint}").as_str()), "{}: {head:?}", path.display());
    assert!(head.iter().any(|l| l.starts_with("# seed: ")), "{}", path.display());
}

#[test]
fn binary_outputs_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("small.json");
    std::fs::write(&cfg_path, SMALL.replace(r#""seed": 7"#, r#""seed": 7, "outputs": {"trajectories": [0, 3]}"#)).unwrap();
    let out = dir.path().join("out");
    let o = sadi(&["run", cfg_path.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let fp = parse_config(&cfg_path).unwrap().fingerprint();
    let mut files: Vec<PathBuf> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["report.csv", "trajectory_0.csv", "trajectory_3.csv"]);
    for f in &files {
        has_provenance(f, &fp);
    }

    let cert = dir.path().join("cert");
    let o = sadi(&["certify", config_path("rootfind_two_starts").to_str().unwrap(), "--out-dir", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let fp = parse_config(&config_path("rootfind_two_starts")).unwrap().fingerprint();
    has_provenance(&cert.join("certificate.txt"), &fp);

    let di = dir.path().join("di");
    let o = sadi(&["simulate-di", config_path("inline_sliding_sign").to_str().unwrap(), "--out-dir", di.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fp = parse_config(&config_path("inline_sliding_sign")).unwrap().fingerprint();
    has_provenance(&di.join("di_path_0.csv"), &fp);
}

#[test]
fn seed_override_and_rerun_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("small.json");
    std::fs::write(&cfg_path, SMALL).unwrap();
    let report = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec!["run", cfg_path.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(sadi(&args).status.success());
        std::fs::read_to_string(out.join("report.csv")).unwrap()
    };
    let a = report("a", &[]);
    let b = report("b", &["--threads", "3"]);
    let c = report("c", &["--seed", "8"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(c.contains("# seed: 8"));
}

#[test]
fn bad_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"preset": "lasso", "iterations": 0, "replications": 1, "seed": 1}"#).unwrap();
    let o = sadi(&["run", p.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("iterations"));
    let o = sadi(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
