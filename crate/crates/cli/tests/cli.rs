use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsonic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sweep_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn solve_writes_solution_and_report() {
    let dir = TempDir::new().unwrap();
    let output = run(&["solve", "--profile", "constant:2.0", "--alpha", "5", "--cells", "200"], dir.path());
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));

    let mut reader = csv::Reader::from_path(dir.path().join("solution.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["x", "n", "E", "nx", "weighted_nx"]);
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[200][1].parse::<f64>().unwrap(), 1.0);

    let report = json(&dir.path().join("solve_report.json"));
    assert_eq!(report["config"]["command"], "solve");
    assert_eq!(report["config"]["solver"]["cells"], 200);
    assert_eq!(report["bounds"]["interior_subsonic"], true);
    assert_eq!(report["bounds"]["field"]["passed"], true);
    assert!(report["residual_norm"].as_f64().unwrap() < 1e-10);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["solve", "--profile", "constant:0.9", "--alpha", "5"][..],
        &["solve", "--profile", "constant:2.0", "--alpha", "-1"],
        &["solve", "--profile", "nonsense", "--alpha", "5"],
        &["solve", "--profile", "constant:2.0", "--alpha", "5", "--cells", "3"],
        &["bogus"],
    ] {
        let output = run(args, dir.path());
        assert_eq!(code(&output), 1, "{args:?}");
    }
}

#[test]
fn synthetic_verify_recovers_exact_exponents() {
    let dir = TempDir::new().unwrap();
    let output = run(&["verify", "--synthetic", "--profile", "constant:2.0", "--alpha", "5"], dir.path());
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stdout));
    let report = json(&dir.path().join("asymptotics_report.json"));
    assert_eq!(report["synthetic"], true);
    assert!((report["right_fit"]["exponent"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((report["left_fit"]["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(report["right_fit"]["r2"].as_f64().unwrap() > 1.0 - 1e-12);
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["summary"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn verify_reports_every_check_and_exit_code_follows_them() {
    let dir = TempDir::new().unwrap();
    let output = run(&["verify", "--profile", "constant:2.0", "--alpha", "5"], dir.path());
    let report = json(&dir.path().join("asymptotics_report.json"));
    let failed: Vec<&str> = report["summary"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(code(&output), if failed.is_empty() { 0 } else { 3 });
    for name in ["residual", "field_bound", "field_at_0", "field_at_1", "left_slope", "right_weighted_slope", "rho0_limit"] {
        assert_eq!(check(&report, name)["status"], "pass", "{name}");
    }
    assert_eq!(report["asymptotics"]["A_applicable"], true);
    assert!(report["asymptotics"]["B_predicted"].as_f64().unwrap() < 0.0);
    assert!(report["config"]["tolerances"]["exponent_tol"].is_number());
    assert!(dir.path().join("solution.csv").exists());
}

#[test]
fn verify_skips_the_left_slope_below_the_threshold() {
    let dir = TempDir::new().unwrap();
    run(&["verify", "--profile", "constant:2.0", "--alpha", "1"], dir.path());
    let report = json(&dir.path().join("asymptotics_report.json"));
    assert_eq!(report["asymptotics"]["A_applicable"], false);
    assert!(report["asymptotics"]["A_predicted"].is_null());
    assert_eq!(check(&report, "left_slope")["status"], "skipped");
    assert_eq!(check(&report, "rho0_limit")["status"], "skipped");
}

#[test]
fn compare_reorders_unless_strict() {
    let dir = TempDir::new().unwrap();
    let output = run(&["compare", "constant:2.0", "constant:3.0", "--alpha", "6", "--cells", "200"], dir.path());
    assert_eq!(code(&output), 0);
    let report = json(&dir.path().join("stability_report.json"));
    assert_eq!(report["reordered"], true);
    assert_eq!(report["stability"]["comparison_ok"], true);
    assert!(report["stability"]["ratio"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("solution_1.csv").exists());

    let strict = TempDir::new().unwrap();
    let args = ["compare", "constant:2.0", "constant:3.0", "--alpha", "6", "--strict-order"];
    assert_eq!(code(&run(&args, strict.path())), 1);
}

#[test]
fn compare_rejects_incomparable_profiles() {
    let dir = TempDir::new().unwrap();
    let output = run(&["compare", "affine:2.0,1.0", "affine:2.5,-1.0", "--alpha", "6"], dir.path());
    assert_eq!(code(&output), 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("incomparable"));
}

#[test]
fn compare_equal_profiles_has_undefined_ratio() {
    let dir = TempDir::new().unwrap();
    let output = run(&["compare", "constant:2.0", "constant:2.0", "--alpha", "6", "--cells", "200"], dir.path());
    assert_eq!(code(&output), 0);
    let report = json(&dir.path().join("stability_report.json"));
    assert!(report["stability"]["ratio"].is_null());
    assert_eq!(report["stability"]["sup_n_diff"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_rows_and_degenerate_eps() {
    let dir = TempDir::new().unwrap();
    let args = ["sweep", "--profile", "constant:2.5", "--eps", "1e-2,1e-3,0", "--alpha", "5,6", "--cells", "100"];
    let output = run(&args, dir.path());
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let rows = sweep_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let expected = if row[1].parse::<f64>().unwrap() == 0.0 { "degenerate_eps" } else { "ok" };
        assert_eq!(&row[6], expected);
    }
    let report = json(&dir.path().join("sweep_report.json"));
    assert_eq!(report["config"]["seed"], 42);
    assert_eq!(report["failed_rows"], 0);
}

#[test]
fn seeded_random_sweep_is_reproducible() {
    let args = ["sweep", "--profile", "constant:2.0", "--eps", "1e-2", "--random-pairs", "2", "--cells", "100"];
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    assert_eq!(code(&run(&args, first.path())), 0);
    assert_eq!(code(&run(&[&args[..], &["--jobs", "1"]].concat(), second.path())), 0);
    let a = sweep_rows(&first.path().join("sweep.csv"));
    let b = sweep_rows(&second.path().join("sweep.csv"));
    assert_eq!(a.len(), 3);
    assert_eq!(a, b);
}
