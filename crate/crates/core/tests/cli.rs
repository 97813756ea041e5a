use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn eigenbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

#[test]
fn neumann_on_half_circle_diameter() {
    let v = json(&eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "0", "--diameter", "3.14159265"]));
    let mu = v["eigenvalue"].as_f64().unwrap();
    assert!((mu - 1.0).abs() < 1e-7, "{mu}");
    assert_eq!(v["method"], "shoot");
    assert_eq!(v["validation"], "ok");
    assert_eq!(v["certificate"].as_array().unwrap().len(), 129);
    for key in ["request", "closed_form", "residual", "iterations", "bracket", "eigenvalues"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn neumann_subquadratic_closed_form() {
    let v = json(&eigenbound(&["bound", "neumann", "--m", "2", "--p", "1.5", "--kappa", "0", "--diameter", "1"]));
    let mu = v["eigenvalue"].as_f64().unwrap();
    let exact = 0.5 * pi_p(1.5).powf(1.5);
    assert!((exact - 5.3187).abs() < 1e-4);
    assert!(((mu - exact) / exact).abs() < 1e-8, "{mu} {exact}");
    assert!(((v["closed_form"].as_f64().unwrap() - exact) / exact).abs() < 1e-14);
}

#[test]
fn dirichlet_quarter_wave_with_both_methods() {
    let v = json(&eigenbound(&[
        "bound", "dirichlet", "--m", "2", "--p", "2", "--kappa", "0", "--lambda", "0", "--inradius", "1", "--method", "both",
        "--cells", "1024",
    ]));
    let exact = PI * PI / 4.0;
    assert!(((v["eigenvalue"].as_f64().unwrap() - exact) / exact).abs() < 1e-8);
    assert!(((v["eigenvalues"]["oracle"].as_f64().unwrap() - exact) / exact).abs() < 1e-6);
    assert!(v["relative_disagreement"].as_f64().unwrap() < 1e-6);
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let out = eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "-1", "--diameter", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"eigenvalue\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let digits = mantissa.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(digits.len(), 17, "{line}");
}

#[test]
fn output_is_deterministic() {
    let args = ["bound", "dirichlet", "--m", "3", "--p", "1.5", "--kappa", "0.2", "--lambda", "0.5", "--inradius", "0.8"];
    assert_eq!(eigenbound(&args).stdout, eigenbound(&args).stdout);
}

#[test]
fn report_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bound.json");
    let out = eigenbound(&[
        "bound", "classical", "--n", "3", "--p", "2", "--kappa", "1", "--diameter", "3.141592653589793", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!((v["eigenvalue"].as_f64().unwrap() - 3.0).abs() < 1e-8);
}

#[test]
fn custom_profile_matches_named_profile() {
    let named = json(&eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "-1", "--diameter", "1"]));
    let custom = json(&eigenbound(&["bound", "neumann", "--profile", "custom 4:-1,3:-4", "--p", "2", "--diameter", "1"]));
    assert_eq!(named["eigenvalue"], custom["eigenvalue"]);
}

#[test]
fn exit_codes() {
    let singular = eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "1", "--diameter", "3.141592653589793"]);
    assert_eq!(singular.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&singular.stderr).contains("c_{4κ}"));

    let dirichlet = eigenbound(&["bound", "dirichlet", "--m", "2", "--p", "2", "--kappa", "0", "--lambda", "1", "--inradius", "2"]);
    assert_eq!(dirichlet.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&dirichlet.stderr).contains("s = 1 "));

    let missing = eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "0"]);
    assert_eq!(missing.status.code(), Some(2));
    let stray = eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "0", "--lambda", "0", "--diameter", "1"]);
    assert_eq!(stray.status.code(), Some(2));
    let bad_p = eigenbound(&["bound", "neumann", "--m", "2", "--p", "1", "--kappa", "0", "--diameter", "1"]);
    assert_eq!(bad_p.status.code(), Some(2));

    let tight = eigenbound(&["bound", "neumann", "--m", "2", "--p", "2", "--kappa", "0", "--diameter", "1", "--rel-tol", "1e-20"]);
    assert_eq!(tight.status.code(), Some(2));

    let oracle_failure = eigenbound(&[
        "bound", "neumann", "--m", "2", "--p", "3", "--kappa", "-1", "--diameter", "1", "--method", "oracle", "--cells", "64",
        "--max-iters", "1",
    ]);
    assert_eq!(oracle_failure.status.code(), Some(3), "{}", String::from_utf8_lossy(&oracle_failure.stderr));
}

fn sweep(grid: &str) -> (Output, Vec<csv::StringRecord>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = eigenbound(&["sweep", "--grid", grid, "--out", path.to_str().unwrap()]);
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header = reader.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["theorem", "m", "p", "kappa", "lambda", "length", "method", "eigenvalue", "residual", "error"]
    );
    let rows = reader.records().map(Result::unwrap).collect();
    (out, rows)
}

#[test]
fn sweep_product_and_closed_form() {
    let (out, rows) = sweep("m=2,3;p=1.5,2;kappa=0;D=1:2:3");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let p: f64 = r[2].parse().unwrap();
        let d: f64 = r[5].parse().unwrap();
        let mu: f64 = r[7].parse().unwrap();
        let exact = (p - 1.0) * (pi_p(p) / d).powf(p);
        assert!(((mu - exact) / exact).abs() < 1e-6, "{r:?}");
        assert!(r[9].is_empty());
    }
}

#[test]
fn sweep_is_ordered_and_decreasing_in_diameter() {
    let (_, rows) = sweep("m=2;p=2;kappa=-1;D=0.5:2.5:9");
    let lengths: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(lengths.windows(2).all(|w| w[0] < w[1]));
    let values: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn sweep_thread_cap_does_not_change_output() {
    let grid = ["sweep", "--grid", "theorem=dirichlet;m=2;p=1.5,3;kappa=0.2;lambda=-0.5,0.5;R=0.4:0.8:3"];
    let serial = Command::new(env!("CARGO_BIN_EXE_eigenbound"))
        .args(grid)
        .env("EIGENBOUND_THREADS", "1")
        .output()
        .unwrap();
    let parallel = eigenbound(&grid);
    assert!(serial.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn sweep_partial_and_total_failures() {
    let (partial, rows) = sweep("m=2;p=2;kappa=1;D=1,3.2");
    assert_eq!(partial.status.code(), Some(0));
    assert!(rows[0][9].is_empty());
    assert!(rows[1][9].contains("c_{4κ}"));

    let (all, rows) = sweep("m=2;p=2;kappa=1;D=3.2,3.3");
    assert_eq!(all.status.code(), Some(2));
    assert_eq!(rows.len(), 2);

    let bad = eigenbound(&["sweep", "--grid", "m=2;p=2;kappa=0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sweep_both_methods_emits_two_rows_per_point() {
    let out = eigenbound(&["sweep", "--grid", "m=2;p=2;kappa=0;D=1", "--method", "both", "--cells", "512"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let methods: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(methods, ["shoot", "oracle"]);
}

fn strip_seconds(stdout: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("seconds");
            }
            v
        })
        .collect()
}

#[test]
fn verify_full_suite_passes() {
    let out = eigenbound(&["verify"]);
    let lines = strip_seconds(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{lines:?}");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[9]["passed"], 9);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--criterion", "3", "--criterion", "5", "--criterion", "7", "--criterion", "9"];
    let a = eigenbound(&args);
    let b = eigenbound(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip_seconds(&a.stdout), strip_seconds(&b.stdout));
}

#[test]
fn injected_weight_fault_fails_verification() {
    let out = eigenbound(&["verify", "--criterion", "8", "--inject-fault", "weight-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let lines = strip_seconds(&out.stdout);
    assert_eq!(lines[0]["pass"], false);
}

#[test]
fn flow_subcommand_reports_the_decay_rate() {
    let v = json(&eigenbound(&["flow", "neumann", "--m", "2", "--p", "2", "--kappa", "0", "--diameter", "2", "--cells", "32"]));
    let expected = PI * PI / 4.0;
    assert!(((v["expected_rate"].as_f64().unwrap() - expected) / expected).abs() < 1e-8);
    assert!(v["relative_error"].as_f64().unwrap() < 0.01);
}
