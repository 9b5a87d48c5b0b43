// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const EXAMPLE_A: [&str; 8] = [
    "--alpha",
    "1.0471975512",
    "--kappa",
    "0.25",
    "--mode",
    "positive",
    "--target",
    "axis=0,0,1:angle=3.1415926536",
];

fn su2opt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su2opt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn su2opt_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_su2opt"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn example_a_has_four_pulses() {
    let mut args = vec!["synth"];
    args.extend(EXAMPLE_A);
    let v = json(&su2opt(&args));
    assert_eq!(v["sequence"].as_array().unwrap().len(), 4);
    assert_eq!(v["schema"], 1);
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn identity_target_is_empty() {
    let v = json(&su2opt(&[
        "synth", "--alpha", "1", "--kappa", "0.5", "--target", "gate=I",
    ]));
    assert!(v["sequence"].as_array().unwrap().is_empty());
    assert_eq!(v["total_cost"].as_f64(), Some(0.0));
    assert_eq!(v["total_cost"].to_string(), "0.0");
}

#[test]
fn bidirectional_catalog_lists_both_limits() {
    let v = json(&su2opt(&[
        "catalog",
        "--alpha",
        "0.6",
        "--kappa",
        "0.9",
        "--mode",
        "bidirectional",
    ]));
    let gens: Vec<Vec<String>> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            t["generators"]
                .as_array()
                .unwrap()
                .iter()
                .map(|g| g.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert!(gens.iter().any(|g| g.contains(&"Q".to_string())));
    assert!(gens.iter().any(|g| g.contains(&"P".to_string())));
}

#[test]
fn json_round_trips_through_trajectory() {
    let mut args = vec!["synth"];
    args.extend(EXAMPLE_A);
    let out = su2opt(&args);
    let synth = json(&out);
    let traj = json(&su2opt_stdin(
        &["trajectory", "--from", "json", "--samples", "4"],
        &out.stdout,
    ));
    assert_eq!(traj["total_cost"], synth["total_cost"]);
    // endpoint is R_z(π) up to phase
    let z = traj["endpoint"]["z"].as_f64().unwrap().abs();
    assert!((z - 1.0).abs() < 1e-9, "{}", traj["endpoint"]);
    let samples = traj["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 1 + 4 * 4);
    assert_eq!(samples.last().unwrap()["t"], synth["total_cost"]);
}

#[test]
fn trajectory_csv_has_header() {
    let mut args = vec!["synth"];
    args.extend(EXAMPLE_A);
    let out = su2opt(&args);
    let t = su2opt_stdin(
        &["trajectory", "--from", "json", "--out", "csv"],
        &out.stdout,
    );
    assert!(t.status.success());
    assert!(String::from_utf8_lossy(&t.stdout).starts_with("t,rx,ry,rz\n"));
}

#[test]
fn malformed_flags_exit_two() {
    let out = su2opt(&[
        "synth", "--alpha", "1", "--kappa", "0.5", "--target", "gate=Q",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown gate"));
    assert_eq!(su2opt(&["synth", "--nope"]).status.code(), Some(2));
    assert_eq!(
        su2opt(&["synth", "--kappa", "0.5", "--target", "gate=I"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        su2opt(&["trajectory", "--from", "yaml"]).status.code(),
        Some(2)
    );
}

#[test]
fn domain_errors_exit_two() {
    let out = su2opt(&[
        "synth", "--alpha", "4", "--kappa", "0.5", "--target", "gate=I",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = su2opt(&[
        "synth", "--alpha", "1", "--kappa", "0.5", "--target", "gate=I", "--tol", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_miss_exits_three() {
    let out = su2opt(&[
        "oracle",
        "--alpha",
        "1",
        "--kappa",
        "0.5",
        "--target",
        "gate=Z_pi",
        "--max-len",
        "1",
        "--grid",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_agrees_with_synth_on_example_a() {
    let mut s = vec!["synth"];
    s.extend(EXAMPLE_A);
    let synth = json(&su2opt(&s));
    let mut o = vec!["oracle", "--grid", "64", "--max-len", "4"];
    o.extend(EXAMPLE_A);
    let oracle = json(&su2opt(&o));
    let gap =
        (oracle["total_cost"].as_f64().unwrap() - synth["total_cost"].as_f64().unwrap()).abs();
    assert!(gap <= oracle["grid_error_bound"].as_f64().unwrap());
}

#[test]
fn unnormalized_quaternion_warns() {
    let out = su2opt(&[
        "synth",
        "--alpha",
        "1",
        "--kappa",
        "0.5",
        "--target",
        "quat=2,0,0,0",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let cfg = scratch(
        "defaults.conf",
        "# example A\nalpha = 1.0471975512\nkappa = 0.25\nmode = positive\ntarget = gate=Z_pi\n",
    );
    let from_file = json(&su2opt(&["synth", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["sequence"].as_array().unwrap().len(), 4);
    let overridden = json(&su2opt(&[
        "synth",
        "--config",
        cfg.to_str().unwrap(),
        "--target",
        "gate=I",
    ]));
    assert!(overridden["sequence"].as_array().unwrap().is_empty());
    let bad = scratch("bad.conf", "speed = 2\n");
    assert_eq!(
        su2opt(&["synth", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seed_suite_runs_every_line() {
    let suite = scratch(
        "suite.txt",
        "# targets\ngate=I\ngate=Z_pi\n\naxis=1,0,0:angle=0.5\n",
    );
    let out = su2opt(&[
        "synth",
        "--alpha",
        "1.0471975512",
        "--kappa",
        "0.25",
        "--seed-suite",
        suite.to_str().unwrap(),
        "--out",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,n,total_cost,residual,template");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("2,1,0.5,"));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let mut args = vec!["synth"];
    args.extend(EXAMPLE_A);
    let many = su2opt(&args);
    let one = Command::new(env!("CARGO_BIN_EXE_su2opt"))
        .args(&args)
        .env("SU2OPT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(many.stdout, one.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_su2opt"))
        .args(&args)
        .env("SU2OPT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn regions_emit_csv_map() {
    let out = su2opt(&[
        "regions",
        "--n",
        "4",
        "--alpha-steps",
        "3",
        "--tx-steps",
        "4",
        "--outer-grid",
        "4",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("alpha,t_x,admissible\n"));
    assert_eq!(text.lines().count(), 1 + 12);
    assert_eq!(su2opt(&["regions", "--n", "3"]).status.code(), Some(2));
}
