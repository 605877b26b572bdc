use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn waf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waf")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let d = dir.to_str().unwrap();
    let mut args = vec!["simulate", "--k", "12", "--n", "300", "--pi", "0.2", "--delta", "0.5", "--seed", "4", "--out", d];
    args.extend_from_slice(extra);
    stdout(&waf(&args));
}

fn strip_wall_time(mut v: Value) -> Value {
    v["metadata"].as_object_mut().unwrap().remove("wall_time");
    v
}

#[test]
fn simulate_then_test_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    for f in ["genotypes.csv", "phenotypes.csv", "truth.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let g = dir.path().join("genotypes.csv");
    let y = dir.path().join("phenotypes.csv");
    let args = [
        "test", "--genotypes", g.to_str().unwrap(), "--phenotypes", y.to_str().unwrap(), "--trait", "binary",
        "--method", "waf", "--method", "minp,ssu,aspu,af", "--seed", "3",
    ];
    let first: Value = serde_json::from_str(&stdout(&waf(&args))).unwrap();
    let second: Value = serde_json::from_str(&stdout(&waf(&args))).unwrap();
    assert_eq!(strip_wall_time(first.clone()), strip_wall_time(second));

    let methods = first["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 5);
    for m in methods {
        let p = m["p_value"].as_f64().unwrap();
        assert!(p > 0.0 && p <= 1.0);
        assert!(m["B_used"].as_u64().unwrap() >= 100);
        assert!(m["escalated"].is_boolean());
    }
    let meta = &first["metadata"];
    assert_eq!(meta["n"], 300);
    assert_eq!(meta["K"], 12);
    assert_eq!(meta["weight_scheme"], "maf");
    assert_eq!(meta["seed"], 3);
    assert!(meta["excluded_snvs"].is_array());
    assert!(meta["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn covariates_are_written_and_used() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--covariate-effect", "0.5", "--trait", "continuous"]);
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let out = stdout(&waf(&[
        "test", "--genotypes", &p("genotypes.csv"), "--phenotypes", &p("phenotypes.csv"), "--covariates",
        &p("covariates.csv"), "--trait", "continuous", "--format", "csv",
    ]));
    assert!(out.starts_with("method,statistic,p_value,B_used,escalated\nwaf,"), "{out}");
}

#[test]
fn extreme_data_hits_the_permutation_floor() {
    let dir = tempfile::tempdir().unwrap();
    let n = 120;
    let mut g = String::from("v1\n");
    let mut y = String::from("status\n");
    for i in 0..n {
        let carrier = i < n / 2;
        g.push_str(if carrier { "1\n" } else { "0\n" });
        y.push_str(if carrier { "1\n" } else { "0\n" });
    }
    let gp = dir.path().join("g.csv");
    let yp = dir.path().join("y.csv");
    fs::write(&gp, g).unwrap();
    fs::write(&yp, y).unwrap();
    let out: Value = serde_json::from_str(&stdout(&waf(&[
        "test", "--genotypes", gp.to_str().unwrap(), "--phenotypes", yp.to_str().unwrap(), "--trait", "binary",
        "--perms", "99", "--perms-max", "99",
    ])))
    .unwrap();
    assert_eq!(out["methods"][0]["p_value"].as_f64().unwrap(), 0.01);
    assert_eq!(out["methods"][0]["B_used"], 99);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "genotypes = {}\nphenotypes = {}\ntrait = binary\nmethod = ssu\nperms = 50\nseed = 1\nformat = csv\n",
            dir.path().join("genotypes.csv").display(),
            dir.path().join("phenotypes.csv").display()
        ),
    )
    .unwrap();
    let from_file = stdout(&waf(&["test", "--config", cfg.to_str().unwrap()]));
    assert!(from_file.contains("\nssu,"), "{from_file}");
    let overridden = stdout(&waf(&["test", "--config", cfg.to_str().unwrap(), "--method", "minp"]));
    assert!(overridden.contains("\nminp,") && !overridden.contains("ssu"), "{overridden}");
}

#[test]
fn malformed_genotypes_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let gp = dir.path().join("g.csv");
    let yp = dir.path().join("y.csv");
    fs::write(&gp, "a,b\n0,1\n1,0\n3,1\n").unwrap();
    fs::write(&yp, "y\n0\n1\n1\n").unwrap();
    let out = waf(&["test", "--genotypes", gp.to_str().unwrap(), "--phenotypes", yp.to_str().unwrap(), "--trait", "binary"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    fs::write(&gp, "a,b\n").unwrap();
    let out = waf(&["test", "--genotypes", gp.to_str().unwrap(), "--phenotypes", yp.to_str().unwrap(), "--trait", "binary"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no subjects"));
}

#[test]
fn mismatched_inputs_and_bad_options_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let g = dir.path().join("genotypes.csv");
    let yp = dir.path().join("short.csv");
    fs::write(&yp, "y\n0\n1\n").unwrap();
    let out = waf(&["test", "--genotypes", g.to_str().unwrap(), "--phenotypes", yp.to_str().unwrap(), "--trait", "binary"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    let y = dir.path().join("phenotypes.csv");
    let out = waf(&["test", "--genotypes", g.to_str().unwrap(), "--phenotypes", y.to_str().unwrap(), "--trait", "binary", "--method", "skat"]);
    assert_eq!(out.status.code(), Some(2));
    let out = waf(&["test", "--genotypes", g.to_str().unwrap(), "--phenotypes", y.to_str().unwrap(), "--trait", "binary", "--perms", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn power_output_is_reproducible_across_thread_settings() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let csv = dir.path().join(name);
        let plot = dir.path().join(format!("{name}.plot.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_waf"))
            .env("WAF_THREADS", threads)
            .args([
                "power", "--k-values", "5,10", "--n", "200", "--pi", "0.2", "--delta", "0.25", "--replicates", "12",
                "--perms", "39", "--seed", "6", "--out", csv.to_str().unwrap(), "--plot-data", plot.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (fs::read_to_string(csv).unwrap(), fs::read_to_string(plot).unwrap())
    };
    let (a, plot) = run("1", "a.csv");
    let (b, _) = run("2", "b.csv");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 5);
    assert!(a.starts_with("scenario,trait,method,K,"));
    let figures: Value = serde_json::from_str(&plot).unwrap();
    assert_eq!(figures[0]["series"].as_array().unwrap().len(), 5);
}
