//! End-to-end behavior of the binary: exit codes, output formats,
//! manifest replay, and the self-describing closed-form cases.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("weylsim-cli-behavior");
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir.join(name)
}

#[test]
fn zeros_hermite_matches_closed_form() {
    let out = run(&["zeros", "--family", "hermite", "--degree", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,zero,equilibrium_residual");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let z: f64 = first[1].parse().unwrap();
    assert!((z - 0.5f64.sqrt()).abs() < 1e-12);
    let residual: f64 = first[2].parse().unwrap();
    assert!(residual.abs() < 1e-10);
}

#[test]
fn zeros_laguerre_matches_closed_form() {
    let out = run(&[
        "zeros",
        "--family",
        "laguerre",
        "--degree",
        "1",
        "--alpha",
        "0",
    ]);
    assert!(out.status.success());
    let line = stdout(&out).lines().nth(1).unwrap().to_string();
    let z: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((z - 1.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["zeros", "--family", "hermite", "--degree", "0"],
        vec!["zeros", "--family", "laguerre", "--degree", "3"], // missing alpha
        vec![
            "simulate", "--system", "a", "--n", "2", "--beta", "1", "--corner",
            "--t-grid", "0.5", "--paths", "0", "--seed", "1",
        ],
        vec![
            "simulate", "--system", "a", "--n", "2", "--beta", "1", "--t-grid",
            "0.5", "--paths", "4", "--seed", "1", // no start
        ],
        vec![
            "simulate", "--system", "a", "--n", "2", "--beta", "-1", "--corner",
            "--t-grid", "0.5", "--paths", "4", "--seed", "1",
        ],
        vec![
            "martingale-check", "--system", "a", "--n", "2", "--k", "3", "--beta",
            "1", "--corner", "--t-grid", "0.5", "--paths", "100", "--seed", "1",
        ],
        vec![
            "charpoly", "--system", "a", "--n", "2", "--beta", "1", "--t", "0",
            "--y", "0",
        ],
        vec![
            "simulate", "--system", "a", "--n", "2", "--beta", "1", "--x0",
            "0.0,1.0", "--t-grid", "0.5", "--paths", "4", "--seed", "1", // unordered
        ],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "expected usage exit for {args:?}: {out:?}"
        );
    }
}

#[test]
fn charpoly_closed_form_only() {
    let out = run(&[
        "charpoly", "--system", "a", "--n", "2", "--beta", "1", "--t", "1", "--y",
        "0,1,2", "--paths", "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y,closed_form");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let v: f64 = row[1].parse().unwrap();
    assert!((v + 1.0).abs() < 1e-12, "E prod(0 - X_i) should be -1");
}

#[test]
fn infinite_beta_paths_are_identical_and_frozen() {
    let out = run(&[
        "simulate", "--system", "a", "--n", "2", "--beta", "inf", "--corner",
        "--t-grid", "0.5", "--dt", "1e-2", "--paths", "3", "--seed", "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let frozen = rows[0].split_once(',').unwrap().1;
    for row in &rows {
        assert_eq!(row.split_once(',').unwrap().1, frozen);
    }
    let x1: f64 = frozen.split(',').nth(1).unwrap().parse().unwrap();
    assert!((x1 - 0.5f64.sqrt()).abs() < 1e-12); // sqrt(2 * 0.5) * z_1
}

#[test]
fn martingale_check_passes_and_reports() {
    let out = run(&[
        "martingale-check", "--system", "b", "--n", "2", "--k", "1", "--beta",
        "1", "--nu", "1", "--corner", "--t-grid", "0.25,0.5", "--dt", "1e-2",
        "--paths", "2000", "--seed", "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("RESULT: PASS"), "{text}");
    assert!(text.contains("max_z"));
}

#[test]
fn oracle_agrees_and_exits_zero() {
    let out = run(&[
        "oracle", "--system", "a", "--n", "2", "--beta", "1", "--t", "1",
        "--samples", "40000", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    // k=2 row carries the negative pair moment -beta t = -1.
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let closed: f64 = row[3].parse().unwrap();
    assert!((closed + 1.0).abs() < 1e-12);
    let mean: f64 = row[1].parse().unwrap();
    assert!(mean < 0.0);
}

#[test]
fn harmonic_check_passes() {
    let out = run(&[
        "harmonic-check", "--system", "a", "--n", "3", "--k", "2", "--beta", "1",
        "--trials", "25", "--seed", "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn replay_reproduces_outputs() {
    let csv = tmp("replay-sim.csv");
    let csv_path = csv.to_string_lossy().into_owned();
    let out = run(&[
        "simulate", "--system", "b", "--n", "2", "--beta", "0.5", "--nu", "1",
        "--corner", "--t-grid", "0.25,0.5", "--dt", "1e-2", "--paths", "8",
        "--seed", "21", "--out", &csv_path,
    ]);
    assert!(out.status.success(), "{out:?}");
    let original = std::fs::read(&csv).unwrap();

    let manifest = format!("{csv_path}.manifest.json");
    let replayed = tmp("replay-sim-copy.csv");
    let replayed_path = replayed.to_string_lossy().into_owned();
    let out = run(&["replay", "--manifest", &manifest, "--out", &replayed_path]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(std::fs::read(&replayed).unwrap(), original);
}

#[test]
fn manifest_sidecar_contains_run_parameters() {
    let csv = tmp("manifest-sim.csv");
    let csv_path = csv.to_string_lossy().into_owned();
    let out = run(&[
        "simulate", "--system", "a", "--n", "1", "--beta", "2", "--corner",
        "--t-grid", "1", "--dt", "1e-2", "--paths", "2", "--seed", "37", "--out",
        &csv_path,
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{csv_path}.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["master_seed"], 37);
    assert_eq!(manifest["params"]["beta"], "2");
    assert_eq!(manifest["params"]["paths"], 2);
    assert!(manifest["version"].is_string());
    assert!(manifest["duration_seconds"].is_number());
}
