use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoquant")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn spectrum_rows_follow_canonical_energies() {
    let out = run(&["spectrum", "--n-max", "3", "--b", "2", "--hbar", "1", "--omega", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["n", "E", "a", "C", "q0", "residual"]);
    let energies: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(energies, [0.5, 1.5, 2.5, 3.5]);
    for r in &rows[2..] {
        assert!(r[5].parse::<f64>().unwrap() <= 1e-10);
    }
}

#[test]
fn spectrum_level_zero_is_undefined() {
    let out = run(&["spectrum", "--n-max", "0", "--b", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n,E,a,C,q0,residual\n0,0.5,1,0,undefined,undefined\n");
}

#[test]
fn spectrum_from_spring_constant_matches_omega() {
    let by_k = stdout(&run(&["spectrum", "--n-max", "4", "--b", "1", "--k", "4", "--m", "1"]));
    let by_omega = stdout(&run(&["spectrum", "--n-max", "4", "--b", "1", "--omega", "2"]));
    let e = |s: &str| csv_rows(s)[1..].iter().map(|r| r[1].clone()).collect::<Vec<_>>();
    assert_eq!(e(&by_k), e(&by_omega));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["spectrum", "--n-max", "3"][..],
        &["spectrum", "--n-max", "3", "--b", "-1"],
        &["spectrum", "--n-max", "3", "--b", "1", "--omega", "1", "--k", "1"],
        &["density", "--potential", "0.5*(", "--energy", "1"],
        &["density", "--potential", "0.5*k*q1^2", "--energy", "1"],
        &["density", "--potential", "0", "--energy", "1", "--grid", "100"],
        &["density", "--potential", "0", "--energy", "1", "--box", "1,2,3"],
        &["density", "--potential", "q1", "--energy", "1", "--param", "oops"],
        &["integrate", "--energy", "1"],
        &["integrate", "--potential", "0", "--energy", "1", "--grid", "32"],
        &["bogus"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"), "{args:?}");
    }
}

#[test]
fn parse_error_reports_offset() {
    let out = run(&["density", "--potential", "0.5*(", "--energy", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 5"));
}

#[test]
fn free_particle_density_is_zero() {
    let out = run(&["density", "--potential", "0", "--energy", "1", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["q1", "q2", "phi", "K", "rho", "inside_mask"]);
    assert_eq!(rows.len(), 1 + 16 * 16);
    assert!(rows[1..].iter().all(|r| r[4] == "0" && r[5] == "true"));
}

#[test]
fn density_mask_follows_the_allowed_region() {
    let out = run(&["density", "--potential", "0.5*q1^2", "--energy", "1", "--epsilon", "1e-3", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0));
    for r in &csv_rows(&stdout(&out))[1..] {
        let q1: f64 = r[0].parse().unwrap();
        let inside = q1 * q1 < 2.0 * (1.0 - 1e-3);
        assert_eq!(r[5], inside.to_string(), "q1 = {q1}");
        assert_eq!(r[4] == "undefined", !inside);
    }
}

#[test]
fn density_outside_allowed_region_exits_1() {
    let out = run(&["density", "--potential", "0.5*q1^2", "--energy", "1", "--box", "10,12,-1,1", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn reduced_integral_matches_closed_form() {
    let out = run(&["integrate", "--reduced", "--k", "1", "--energy", "0.5", "--b", "1", "--q0", "0.5", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["kind", "tolerance", "value", "error", "evaluations", "closed_form"]);
    let value: f64 = rows[1][2].parse().unwrap();
    assert!((value + 2.0 / 3.0).abs() <= 1e-10);
}

#[test]
fn reduced_integral_at_turning_point_exits_1() {
    let out = run(&["integrate", "--reduced", "--k", "1", "--energy", "0.5", "--b", "1", "--q0", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("turning point"));
}

#[test]
fn free_particle_integral_is_zero_with_tables() {
    let out = run(&["integrate", "--potential", "0", "--energy", "1", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[1], ["result", "64", "0.001", "0", "0"]);
    let kinds: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(kinds, ["result", "cells", "cells", "cells", "epsilon", "epsilon", "epsilon"]);
    assert!(rows[1..].iter().all(|r| r[3] == "0"));
}

#[test]
fn oscillator_integral_reports_convergence() {
    let out = run(&[
        "integrate", "--potential", "0.5*k*(q1^2 + q2^2)", "--param", "k=1", "--energy", "1",
        "--box", "-1.5,1.5,-1.5,1.5", "--grid", "512", "--epsilon", "0.1", "--levels", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    let cells: Vec<&str> = rows.iter().filter(|r| r[0] == "cells").map(|r| r[1].as_str()).collect();
    assert_eq!(cells, ["64", "128", "256", "512"]);
    // the masked integral tends to -(1 - eps)/eps = -9 for the unit oscillator;
    // the reported error estimate must cover the actual deviation
    let value: f64 = rows[1][3].parse().unwrap();
    let error: f64 = rows[1][4].parse().unwrap();
    assert!((value + 9.0).abs() <= error && error < 0.2, "{value} +- {error}");
}

#[test]
fn csv_and_json_carry_identical_values() {
    let base = ["density", "--potential", "0.5*q1^2 + q2^2*0.25", "--energy", "2", "--grid", "16"];
    let csv = stdout(&run(&base));
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let json: Value = serde_json::from_str(&stdout(&run(&json_args))).unwrap();
    assert_eq!(json["meta"]["command"], "density");
    let rows = csv_rows(&csv);
    let header = &rows[0];
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len() - 1);
    for (r, j) in rows[1..].iter().zip(json_rows) {
        for (col, cell) in header.iter().zip(r) {
            let v = &j[col.as_str()];
            match cell.as_str() {
                "undefined" => assert!(v.is_null()),
                "true" | "false" => assert_eq!(v.as_bool().unwrap().to_string(), *cell),
                num => assert_eq!(v.as_f64().unwrap(), num.parse::<f64>().unwrap(), "{col}"),
            }
        }
    }
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = std::env::temp_dir().join(format!("topoquant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spectrum.json");
    let args = ["spectrum", "--n-max", "6", "--b", "0.7", "--hbar", "0.3", "--format", "json", "--out"];
    let mut with_out = args.to_vec();
    with_out.push(path.to_str().unwrap());
    assert_eq!(run(&with_out).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    assert_eq!(run(&with_out).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), first);
    assert!(!first.contains(&b'\r'));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_passes_on_a_correct_build() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}
