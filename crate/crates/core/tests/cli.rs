use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use manifold_landau::cli::{run, Report, EXIT_ERROR, EXIT_HYPOTHESES, EXIT_OK};
use serde_json::Value;

const LATITUDE: &str = r#"
family = "latitude"
colatitude = 0.7853981633974483
seed = 42

[phase]
kind = "linear"
omega = 1.0
phi = 0.0

[window]
t_min = 0.0
t_max = 6.283185307179586
samples = 2001

[aux]
kind = "chordal"
center = "chebyshev"
"#;

const COUNTEREXAMPLE: &str = r#"
family = "great_circle"
a = [1.0, 0.0, 0.0]
b = [0.0, 1.0, 0.0]

[phase]
kind = "quadratic"
alpha = 1.0
omega = 0.0

[window]
t_min = 0.0
t_max = 10.0
samples = 4001
"#;

const SINE: &str = r#"
family = "scalar"
terms = [{ kind = "sine", amplitude = 1.0, omega = 1.0, phase = 0.0 }]

[window]
t_min = 0.0
t_max = 6.283185307179586
samples = 4001
"#;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn invoke(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("manifold-landau").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let value: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

fn assert_valid(json: &str) -> Value {
    let value: Value = serde_json::from_str(json).unwrap();
    let compiled = schema();
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations: {msgs:?}");
    }
    value
}

fn csv_column_max(text: &str, column: &str) -> f64 {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let idx = reader.headers().unwrap().iter().position(|h| h == column).unwrap();
    reader.records().map(|r| r.unwrap()[idx].parse::<f64>().unwrap()).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn constant_text_json_and_digits() {
    let o = invoke(&["constant"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("C = 1.879385241"), "{}", o.stdout);

    let o = invoke(&["constant", "--digits", "3"]);
    assert!(o.stdout.lines().next().unwrap().ends_with("1.879"));

    let o = invoke(&["constant", "--json"]);
    let v = assert_valid(&o.stdout);
    let c = v["constant"]["c"].as_f64().unwrap();
    assert!((c - 2.0 * (PI / 9.0).cos()).abs() < 1e-12);
    assert!(v["constant"]["residual"].as_f64().unwrap().abs() <= 1e-12);

    let o = invoke(&["constant", "--csv"]);
    assert!(o.stdout.starts_with("key,value\n"));
    assert!(o.stdout.contains("constant.c,1.879385"));
}

#[test]
fn check_latitude_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "lat.toml", LATITUDE);
    let o = invoke(&["check", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    let c = 2.0 * (PI / 9.0).cos();
    let slack = v["bound"]["slack_ratio"].as_f64().unwrap();
    assert!((slack - 1.0 / (c * c)).abs() < 1e-6);
    assert!((slack - 0.28312).abs() < 1e-5);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["aux"]["chebyshev"], true);
    assert!(v["bound"]["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("squared")));
}

#[test]
fn check_explicit_center_uses_given_point() {
    let dir = tempfile::tempdir().unwrap();
    let text = LATITUDE.replace("center = \"chebyshev\"", "center = [0.0, 0.0, 1.0]");
    let spec = write(dir.path(), "lat.toml", &text);
    let o = invoke(&["check", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK);
    let v = assert_valid(&o.stdout);
    assert_eq!(v["aux"]["chebyshev"], false);
    assert!(v["center"].is_null());
    assert!((v["bound"]["lambda"]["value"].as_f64().unwrap() - FRAC_PI_4.cos()).abs() < 1e-12);
}

#[test]
fn check_counterexample_fails_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "ce.toml", COUNTEREXAMPLE);
    let o = invoke(&["check", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_HYPOTHESES);
    let v = assert_valid(&o.stdout);
    assert!(v["bound"]["lambda"]["value"].as_f64().unwrap() <= 0.0);
    assert_eq!(v["bound"]["hypotheses_ok"], false);
    assert!(v["bound"]["rhs"].is_null());
}

#[test]
fn invalid_specs_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.toml", &LATITUDE.replace("samples = 2001", "samples = 1"));
    let o = invoke(&["check", spec.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.stderr.contains("window"), "{}", o.stderr);

    let spec = write(dir.path(), "typo.toml", &LATITUDE.replace("colatitude =", "colatitud ="));
    let o = invoke(&["check", spec.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.stderr.contains("colatitud"), "{}", o.stderr);

    let o = invoke(&["check", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.code, EXIT_ERROR);

    let o = invoke(&["frobnicate"]);
    assert_eq!(o.code, EXIT_ERROR);
}

#[test]
fn diagnose_reports_all_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "lat.toml", LATITUDE);
    let o = invoke(&["diagnose", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    for flag in ["v_bound_ok", "speed_lipschitz_ok", "chain_ok"] {
        assert_eq!(v["diagnostics"][flag], true, "{flag}");
    }

    let spec = write(dir.path(), "ce.toml", COUNTEREXAMPLE);
    let o = invoke(&["diagnose", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_HYPOTHESES);
    assert!(assert_valid(&o.stdout)["diagnostics"].is_null());
}

#[test]
fn counterexample_csv_columns() {
    let o = invoke(&["counterexample", "--T", "50", "--csv"]);
    assert_eq!(o.code, EXIT_HYPOTHESES);
    assert!(o.stdout.starts_with("t,speed,cov_accel_norm,v,u\n"));
    assert!((csv_column_max(&o.stdout, "speed") - 50.0).abs() < 1e-9);
    assert!((csv_column_max(&o.stdout, "cov_accel_norm") - 1.0).abs() < 1e-9);
    assert!((csv_column_max(&o.stdout, "t") - 50.0).abs() < 1e-12);

    let o = invoke(&["counterexample", "--T", "50", "--json", "--samples", "4001"]);
    let v = assert_valid(&o.stdout);
    assert!((v["bound"]["speed"]["value"].as_f64().unwrap() - 50.0).abs() < 1e-6);
}

#[test]
fn chebyshev_of_latitude_points() {
    let dir = tempfile::tempdir().unwrap();
    let th = FRAC_PI_4;
    let mut text = String::from("x,y,z\n");
    for i in 0..64 {
        let phi = TAU * f64::from(i) / 64.0;
        text.push_str(&format!("{},{},{}\n", th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos()));
    }
    let path = write(dir.path(), "points.csv", &text);
    let o = invoke(&["chebyshev", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    let e: Vec<f64> = v["center"]["e"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(e[0].abs() < 1e-4 && e[1].abs() < 1e-4 && (e[2] - 1.0).abs() < 1e-8);

    let bad = write(dir.path(), "bad.csv", "x,y,z\n1,0,0\n0,2,0\n");
    let o = invoke(&["chebyshev", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.stderr.contains("row 2"), "{}", o.stderr);
}

#[test]
fn probe_latitude_is_one() {
    let o = invoke(&["probe", "--family", "latitude", "--budget", "10", "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    assert!((v["probe"]["best_q"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["probe"]["seed"], 42);

    let again = invoke(&["probe", "--family", "latitude", "--budget", "10", "--json"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn classical_sine() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "sine.toml", SINE);
    let o = invoke(&["classical", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    assert!((v["classical"]["slack_ratio"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["classical"]["banach_constant"], 4.0);

    let o = invoke(&["classical", spec.to_str().unwrap(), "--csv"]);
    assert!((csv_column_max(&o.stdout, "speed") - 1.0).abs() < 1e-6);
}

#[test]
fn sampled_spec_resolves_relative_path() {
    let dir = tempfile::tempdir().unwrap();
    let th = FRAC_PI_4;
    let n = 4001;
    let mut text = String::from("t,x,y,z\n");
    for i in 0..n {
        let t = TAU * i as f64 / (n - 1) as f64;
        text.push_str(&format!("{t},{},{},{}\n", th.sin() * t.cos(), th.sin() * t.sin(), th.cos()));
    }
    write(dir.path(), "samples.csv", &text);
    let spec = write(dir.path(), "s.toml", "family = \"sampled\"\npath = \"samples.csv\"\n");
    let o = invoke(&["check", spec.to_str().unwrap(), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = assert_valid(&o.stdout);
    let speed = v["bound"]["speed"].clone();
    assert!((speed["value"].as_f64().unwrap() - th.sin()).abs() < 1e-5, "{speed}");
    assert!(v["bound"]["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("not periodic")));
}

#[test]
fn reports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let lat = write(dir.path(), "lat.toml", LATITUDE);
    let ce = write(dir.path(), "ce.toml", COUNTEREXAMPLE);
    let sine = write(dir.path(), "sine.toml", SINE);
    let runs: Vec<Vec<&str>> = vec![
        vec!["constant", "--json"],
        vec!["diagnose", lat.to_str().unwrap(), "--json"],
        vec!["check", ce.to_str().unwrap(), "--json"],
        vec!["classical", sine.to_str().unwrap(), "--json"],
        vec!["probe", "--family", "great-circle-sinusoidal", "--budget", "3", "--json"],
    ];
    for args in runs {
        let o = invoke(&args);
        assert_valid(&o.stdout);
        let parsed: Report = serde_json::from_str(&o.stdout).unwrap();
        let again = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(again.trim_end(), o.stdout.trim_end(), "{args:?}");
        let reparsed: Report = serde_json::from_str(&again).unwrap();
        assert_eq!(parsed, reparsed);
    }
}

#[test]
fn help_documents_csv_columns() {
    let o = invoke(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    for col in ["cov_accel_norm", "speed", "MANIFOLD_LANDAU_THREADS"] {
        assert!(o.stdout.contains(col), "{col}");
    }
}

#[test]
fn binary_exit_codes_and_thread_override() {
    let bin = env!("CARGO_BIN_EXE_manifold-landau");
    let status = Command::new(bin).args(["constant", "--digits", "4"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&status.stdout).lines().next(), Some("C = 1.8794"));

    let ok = Command::new(bin).arg("constant").env("MANIFOLD_LANDAU_THREADS", "2").output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).arg("constant").env("MANIFOLD_LANDAU_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_ERROR));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("MANIFOLD_LANDAU_THREADS"));
}
