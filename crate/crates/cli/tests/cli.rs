//! End-to-end runs of the `sqg` binary on a small grid.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sqg_cli::snapshot;
use sqg_core::fixpoint::extend_periodically;
use sqg_core::{Field, Grid, Trajectory};

const SMALL: &str = r#"
[grid]
n = 32
[stepper]
dt = 0.01
[output]
snapshot_every = 1
[evolve]
periods = 2
[probes]
n = 32
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn sqg(config: Option<&Path>, out: &Path, args: &[&str]) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqg"));
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.arg("--out").arg(out).args(args);
    let output = cmd.output().expect("spawn sqg");
    output.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn validate(schema: &str, doc: &Path) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema}.schema.json"));
    let validator = jsonschema::validator_for(&json(&schema_path)).unwrap();
    let instance = json(doc);
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{} against {schema}: {errors:#?}", doc.display());
}

fn trajectory_from(dir: &Path) -> Trajectory {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let (times, fields): (Vec<f64>, Vec<Field>) = paths
        .iter()
        .map(|p| {
            let s = snapshot::read(p).unwrap();
            (s.time, s.field)
        })
        .unzip();
    Trajectory::new(times, fields).unwrap()
}

#[test]
fn every_subcommand_emits_schema_valid_documents() {
    let dir = scratch("schemas");
    let cfg = write_config(&dir, SMALL);
    let solve = dir.join("solve");
    assert_eq!(sqg(Some(&cfg), &solve, &["solve"]), 0);
    validate("convergence_report", &solve.join("report.json"));
    validate("meta", &solve.join("meta.json"));
    for f in ["theta0.sqgf", "iterations.csv", "besov_theta0.csv", "trajectory/theta_000000.sqgf"] {
        assert!(solve.join(f).is_file(), "{f}");
    }

    let linear = dir.join("linear");
    assert_eq!(sqg(Some(&cfg), &linear, &["linear"]), 0);
    validate("linear_report", &linear.join("linear_report.json"));

    let evolve = dir.join("evolve");
    let theta0 = solve.join("theta0.sqgf");
    assert_eq!(sqg(Some(&cfg), &evolve, &["evolve", theta0.to_str().unwrap()]), 0);
    validate("evolve_report", &evolve.join("evolve_report.json"));

    let verify = dir.join("verify");
    assert_eq!(sqg(Some(&cfg), &verify, &["verify"]), 0);
    validate("probe_reports", &verify.join("probes.json"));
    assert!(json(&verify.join("probes.json"))["passed"].as_bool().unwrap());

    let besov = dir.join("besov");
    assert_eq!(sqg(None, &besov, &["besov", theta0.to_str().unwrap(), "--s", "0.5", "--p", "4", "--q", "2"]), 0);
    validate("besov", &besov.join("besov.json"));
    validate("meta", &besov.join("meta.json"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, SMALL);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(sqg(Some(&cfg), &a, &["solve"]), 0);
    assert_eq!(sqg(Some(&cfg), &b, &["solve"]), 0);
    let mut files = vec![PathBuf::from("report.json"), "iterations.csv".into(), "theta0.sqgf".into()];
    for e in fs::read_dir(a.join("trajectory")).unwrap() {
        files.push(Path::new("trajectory").join(e.unwrap().file_name()));
    }
    for f in &files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{}", f.display());
    }
    assert_eq!(json(&a.join("meta.json"))["config_hash"], json(&b.join("meta.json"))["config_hash"]);
}

#[test]
fn invalid_configurations_exit_2() {
    let dir = scratch("invalid");
    let cases = [
        ("[model]\nalpha = 0.5\n", "2/3<α<1"),
        ("[model]\nalpha = 1.0\n", "2/3<α<1"),
        ("[model]\nr = 2\n", ""),
        ("[grid]\nn = 48\n", ""),
        ("[model]\nbogus = 1\n", ""),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write_config(&dir, body);
        let out = dir.join(format!("case{i}"));
        let output = Command::new(env!("CARGO_BIN_EXE_sqg"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .arg("solve")
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(2), "{body}");
        let stderr = String::from_utf8_lossy(&output.stderr);
        assert!(stderr.contains(needle), "{stderr}");
        assert!(!out.join("report.json").exists());
    }
}

#[test]
fn missing_snapshot_is_an_io_error() {
    let dir = scratch("io");
    let missing = dir.join("nope.sqgf");
    assert_eq!(sqg(None, &dir.join("out"), &["besov", missing.to_str().unwrap()]), 5);
}

#[test]
fn besov_of_zero_and_single_mode() {
    let dir = scratch("besov");
    let grid = Grid::standard(32).unwrap();
    let zero = dir.join("zero.sqgf");
    snapshot::write(&zero, &Field::zeros(&grid), 0.0).unwrap();
    let out = dir.join("zero");
    assert_eq!(sqg(None, &out, &["besov", zero.to_str().unwrap(), "--s", "0.5", "--p", "4", "--q", "2"]), 0);
    assert_eq!(json(&out.join("besov.json"))["norm"].as_f64().unwrap(), 0.0);

    let single = dir.join("single.sqgf");
    snapshot::write(&single, &Field::from_fn(&grid, |x, _| x.cos()), 0.0).unwrap();
    let out = dir.join("single");
    assert_eq!(sqg(None, &out, &["besov", single.to_str().unwrap(), "--s", "0.5", "--p", "2", "--q", "2"]), 0);
    let doc = json(&out.join("besov.json"));
    let bars: Vec<(i64, f64)> = doc["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["j"].as_i64().unwrap(), r["value"].as_f64().unwrap()))
        .filter(|(_, v)| *v > 1e-12)
        .collect();
    assert_eq!(bars.len(), 1, "{bars:?}");
    assert_eq!(bars[0].0, 0);
    // ‖cos x‖_{L²} over the (2π)² box is π√2
    let expected = std::f64::consts::PI * std::f64::consts::SQRT_2;
    assert!((bars[0].1 - expected).abs() < 1e-12, "{}", bars[0].1);
    assert!((doc["norm"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn evolving_the_periodic_datum_repeats_the_orbit() {
    let dir = scratch("evolve");
    let cfg = write_config(&dir, SMALL);
    let solve = dir.join("solve");
    assert_eq!(sqg(Some(&cfg), &solve, &["solve"]), 0);
    let orbit = trajectory_from(&solve.join("trajectory"));
    let two = extend_periodically(&orbit, 2, 1e-6).unwrap();

    let evolve = dir.join("evolve");
    let theta0 = solve.join("theta0.sqgf");
    assert_eq!(sqg(Some(&cfg), &evolve, &["evolve", theta0.to_str().unwrap()]), 0);
    let evolved = trajectory_from(&evolve.join("trajectory"));
    assert_eq!(evolved.len(), two.len());
    let scale = orbit.first().max_abs();
    for ((t1, a), (t2, b)) in evolved.iter().zip(two.iter()) {
        assert!((t1 - t2).abs() < 1e-12);
        let rel = a.max_abs_diff(b).unwrap() / scale;
        assert!(rel < 1e-6, "t = {t1}: {rel:e}");
    }
}

#[test]
fn large_forcing_ends_in_a_structured_report() {
    let dir = scratch("large");
    for (amplitude, code) in [(30.0, 3), (300.0, 4)] {
        let cfg = write_config(&dir, &format!("[grid]\nn = 32\n[stepper]\ndt = 0.01\n[forcing]\namplitude = {amplitude}\n"));
        let out = dir.join(format!("delta{amplitude}"));
        assert_eq!(sqg(Some(&cfg), &out, &["solve"]), code, "δ = {amplitude}");
        validate("convergence_report", &out.join("report.json"));
        let report = json(&out.join("report.json"));
        assert!(!report["final"]["converged"].as_bool().unwrap());
        assert_eq!(report["divergence"].is_null(), code == 3);
        assert_eq!(json(&out.join("meta.json"))["exit_code"], code);
    }
}

#[test]
fn probes_do_not_depend_on_thread_count() {
    let dir = scratch("threads");
    let cfg = write_config(&dir, SMALL);
    let (one, two) = (dir.join("one"), dir.join("two"));
    assert_eq!(sqg(Some(&cfg), &one, &["--threads", "1", "verify"]), 0);
    assert_eq!(sqg(Some(&cfg), &two, &["--threads", "2", "verify"]), 0);
    for f in ["probes.json", "probe_ratios.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(two.join(f)).unwrap(), "{f}");
    }
}
