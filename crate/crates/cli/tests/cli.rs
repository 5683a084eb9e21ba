use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use skorokhod_core::montecarlo::{read_binary, read_csv, Method};

fn skorokhod(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skorokhod"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("SKOROKHOD_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: [&str; 8] = ["--n-terms", "512", "--grid", "4096", "--m-b", "2048", "--levels", "12"];

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = skorokhod(dir.path(), &["check", "--dist", "uniform", "--a", "1"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("P_GT_1"));
    let frag = json(&dir.path().join("solvability.json"));
    assert_eq!(frag["report"]["verdict"], "P_GT_1");
    assert_eq!(frag["config"]["dist"], "uniform");

    assert_eq!(code(&skorokhod(dir.path(), &["check", "--dist", "paper-heavy-tail"])), 0);
    assert_eq!(json(&dir.path().join("solvability.json"))["report"]["verdict"], "ZYGMUND_SUFFICIENT");

    assert_eq!(code(&skorokhod(dir.path(), &["check", "--dist", "koebe"])), 3);
    assert_eq!(json(&dir.path().join("solvability.json"))["report"]["verdict"], "NON_INTEGRABLE");
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("q.csv");
    fs::write(&table, "u,q\n0.5,banana\n").unwrap();
    let t = table.to_str().unwrap();
    assert_eq!(code(&skorokhod(dir.path(), &["check", "--dist", "table", "--table", t])), 64);
    assert_eq!(code(&skorokhod(dir.path(), &["check", "--dist", "table"])), 64);
    assert_eq!(code(&skorokhod(dir.path(), &["check", "--h", "-1"])), 64);
    assert_eq!(code(&skorokhod(dir.path(), &["frobnicate"])), 64);
    // a table whose mean is not zero fails validation
    fs::write(&table, "u,q\n0.5,1\n1,2\n").unwrap();
    assert_eq!(code(&skorokhod(dir.path(), &["check", "--dist", "table", "--table", t])), 64);
    assert_eq!(code(&skorokhod(dir.path(), &["--help"])), 0);
}

#[test]
fn table_input_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("q.csv");
    fs::write(&table, "u,q\n0.25,-1.5\n0.5,-0.5\n0.75,0.5\n1,1.5\n").unwrap();
    let o = skorokhod(
        dir.path(),
        &["check", "--dist", "table", "--table", table.to_str().unwrap(), "--interpolation", "step"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("solvability.json"))["report"]["verdict"], "P_GT_1");
}

#[test]
fn report_on_an_empty_directory_lists_what_is_missing() {
    let dir = tempfile::tempdir().unwrap();
    let o = skorokhod(dir.path(), &["report"]);
    assert_eq!(code(&o), 6);
    let err = String::from_utf8_lossy(&o.stderr);
    for f in ["solvability.json", "geometry.json", "simulation.json"] {
        assert!(err.contains(f), "{err}");
    }
}

#[test]
fn build_writes_artifacts_and_refuses_unsolvable_specs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["build"];
    args.extend(SMALL);
    assert_eq!(code(&skorokhod(dir.path(), &args)), 0);
    for f in ["series.json", "curve.csv", "domain.svg", "geometry.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let g = json(&dir.path().join("geometry.json"));
    assert_eq!(g["simple"], true);
    assert_eq!(g["winding_number"], 1);
    assert_eq!(g["truncation"], Value::Null);
    let svg = fs::read_to_string(dir.path().join("domain.svg")).unwrap();
    assert!(svg.contains("viewBox=\"0 0 1000 1000\""));
    assert!(svg.contains("simple: yes"));

    let o = skorokhod(dir.path(), &["build", "--dist", "koebe"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
}

#[test]
fn heavy_tail_build_is_truncated() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&skorokhod(dir.path(), &["build", "--dist", "paper-heavy-tail"])), 0);
    let g = json(&dir.path().join("geometry.json"));
    assert_eq!(g["simple"], true);
    assert_eq!(g["summation"], "fejer");
    let tail = g["tail_mass"].as_f64().unwrap();
    assert!(tail > 0.0 && tail <= 1e-3, "{tail}");
    assert!(fs::read_to_string(dir.path().join("domain.svg")).unwrap().contains("truncat"));
}

#[test]
fn two_atoms_give_a_truncated_strip() {
    // Re is constant on two arcs and Im diverges at the jumps: the domain is
    // the strip -1 < Re < 2, cut off at the truncation radius
    let dir = tempfile::tempdir().unwrap();
    let o = skorokhod(dir.path(), &["build", "--dist", "two-point", "--lower", "-1", "--upper", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = json(&dir.path().join("geometry.json"));
    assert_eq!(g["simple"], true);
    assert_eq!(g["summation"], "fejer");
    assert!(g["truncation"]["radius"].as_f64().unwrap() > 2.0);
    let b = &g["bounding_box"];
    assert!(b["min"][0].as_f64().unwrap() > -1.1 && b["max"][0].as_f64().unwrap() < 2.1, "{b}");
}

#[test]
fn step_budget_keeps_partial_samples() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--max-steps", "2000", "--n-paths", "200"];
    args.extend(SMALL);
    let o = skorokhod(dir.path(), &args);
    assert_eq!(code(&o), 5);
    let sim = json(&dir.path().join("simulation.json"));
    assert!(sim["error"].as_str().unwrap().contains("step budget"));
    let kept = read_csv(fs::read(dir.path().join("samples_euler.csv")).unwrap().as_slice()).unwrap();
    assert!(kept.len() < 200);
    assert!(kept.iter().all(|s| s.method == Method::Euler && s.tau.unwrap() > 0.0));
}

#[test]
fn full_uniform_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["check", "build", "sample", "simulate"] {
        let mut args = vec![cmd, "--n-samples", "20000", "--n-paths", "4000"];
        args.extend(SMALL);
        let o = skorokhod(dir.path(), &args);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = skorokhod(dir.path(), &["report"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("overall: pass"));
    let report = json(&dir.path().join("report.json"));
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["geometry", "sampling", "simulation", "solvability", "summary"]);
    assert_eq!(report["summary"]["pass"], true);
    assert!(report["simulation"]["ito"]["pass"].as_bool().unwrap());
    let samples = read_csv(fs::read(dir.path().join("samples_exact.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(samples.len(), 20000);
    let meta = json(&dir.path().join("meta.json"));
    assert!(meta["report"]["unix_time"].as_u64().is_some());
}

#[test]
fn heavy_tail_report_passes_with_bias_note() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--dist", "paper-heavy-tail", "--n-samples", "20000", "--n-paths", "1000"];
    for cmd in ["check", "build", "sample", "simulate"] {
        let mut args = vec![cmd];
        args.extend(base);
        let o = skorokhod(dir.path(), &args);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = skorokhod(dir.path(), &["report"]);
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("unbounded domain truncated"), "{out}");
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["simulation"]["ito"], Value::Null);
    assert_eq!(report["simulation"]["expected_tau_series"]["value"], Value::Null);
}

#[test]
fn koebe_samples_match_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = skorokhod(dir.path(), &["sample", "--dist", "koebe", "--n-samples", "20000", "--format", "binary"]);
    assert_eq!(code(&o), 0);
    let frag = json(&dir.path().join("sampling.json"));
    assert_eq!(frag["ks"]["pass"], true);
    let s = read_binary(fs::read(dir.path().join("samples_exact.bin")).unwrap().as_slice()).unwrap();
    assert_eq!(s.len(), 20000);
    assert!(s.iter().all(|x| x.position.re <= -0.25));
}

#[test]
fn same_seed_same_bytes() {
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let d = root.path().join(name);
        let mut args = vec!["sample", "--seed", "11", "--n-samples", "25000", "--threads", threads];
        args.extend(SMALL);
        assert_eq!(code(&skorokhod(&d, &args)), 0);
        (fs::read(d.join("samples_exact.csv")).unwrap(), fs::read(d.join("sampling.json")).unwrap())
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "3"));
    let c = {
        let d = root.path().join("c");
        let mut args = vec!["sample", "--seed", "12", "--n-samples", "25000"];
        args.extend(SMALL);
        assert_eq!(code(&skorokhod(&d, &args)), 0);
        fs::read(d.join("samples_exact.csv")).unwrap()
    };
    assert_ne!(a.0, c);
}

#[test]
fn config_file_with_flag_overrides_and_env_default() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    let o = Command::new(env!("CARGO_BIN_EXE_skorokhod"))
        .args(["config", "--dist", "paper-heavy-tail", "--seed", "5", "--write"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.contains("dist=paper-heavy-tail\n") && text.contains("seed=5\n"));

    // the file is read back, and a flag beats it
    let shown = Command::new(env!("CARGO_BIN_EXE_skorokhod"))
        .args(["config", "--seed", "6", "--config"])
        .arg(&file)
        .output()
        .unwrap();
    let shown = String::from_utf8(shown.stdout).unwrap();
    assert!(shown.contains("dist=paper-heavy-tail\n") && shown.contains("seed=6\n"), "{shown}");

    let env_out = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_skorokhod"))
        .args(["check", "--dist", "uniform"])
        .env("SKOROKHOD_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_out.join("solvability.json").is_file());
}
