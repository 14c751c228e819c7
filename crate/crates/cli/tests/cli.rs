use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruelle-kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn c(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn close(v: &Value, re: f64, im: f64, tol: f64) -> bool {
    let (a, b) = c(v);
    (a - re).hypot(b - im) < tol
}

#[test]
fn analyze_z_squared() {
    let r = json(&["analyze", "--map", &data("z2.json")]);
    assert_eq!(r["degree"], 2);
    assert_eq!(r["standard"], true);
    assert_eq!(r["normalization"]["status"], "standard");
    assert!(close(&r["critical_points"][0], 0.0, 0.0, 1e-12));
    assert!(close(&r["residues"][0], 0.5, 0.0, 1e-12));
    assert!(close(&r["omega"], 0.0, 0.0, 1e-12));
}

#[test]
fn analyze_fixture() {
    let r = json(&["analyze", "--map", &data("g.json")]);
    assert!(close(&r["critical_points"][0], 1.0 / 3.0, 0.0, 1e-12));
    assert!(close(&r["residues"][0], 1.0 / 6.0, 0.0, 1e-12));
    assert!(close(&r["critical_values"][0], -1.0 / 3.0, 0.0, 1e-12));
    assert!(r["decomposition_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn analyze_normalizes_chebyshev() {
    let r = json(&["analyze", "--map", &data("chebyshev.json")]);
    assert_eq!(r["standard"], false);
    let n = &r["normalization"];
    assert_eq!(n["status"], "normalized");
    let num = n["map"]["numerator"].as_array().unwrap();
    for (v, want) in num.iter().zip([0.0, -2.0, 3.0]) {
        assert!(close(v, want, 0.0, 1e-12), "{num:?}");
    }
}

#[test]
fn analyze_round_trips_through_emitted_spec() {
    let first = json(&["analyze", "--map", &data("g.json")]);
    let path = std::env::temp_dir().join(format!("ruelle-kit-roundtrip-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&first["map"]).unwrap()).unwrap();
    let second = json(&["analyze", "--map", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(first, second);
}

#[test]
fn input_errors_exit_2() {
    for file in ["shared_root.json", "malformed.json", "does-not-exist.json"] {
        let out = run(&["analyze", "--map", &data(file)]);
        assert_eq!(out.status.code(), Some(2), "{file}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(&["orbit", "--point", "0,0"]).status.code(), Some(2));
}

#[test]
fn non_simple_critical_point_exits_3() {
    let out = run(&["analyze", "--map", &data("z3.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn summability_fixture() {
    let r = json(&[
        "summability",
        "--map",
        &data("g.json"),
        "--point",
        "0.3333333333333333,0",
        "--order",
        "60",
    ]);
    assert_eq!(r["verdict"], "summable-evidence");
    let sums = r["forward"]["partial_sums"].as_array().unwrap();
    assert_eq!(sums.len(), 60);
    assert!(close(sums.last().unwrap(), 2.0 / 3.0, 0.0, 1e-12));
}

#[test]
fn summability_single_term_and_csv() {
    let csv = stdout(&[
        "summability",
        "--map",
        &data("g.json"),
        "--point",
        "0.3333333333333333,0",
        "--order",
        "1",
        "--format",
        "csv",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,term_re,term_im,partial_re,partial_im,|term|");
    assert_eq!(lines[1], "0,1.0,0.0,1.0,0.0,1.0");
    assert_eq!(lines.len(), 2);
}

#[test]
fn summability_attracting_orbit_diverges() {
    let r = json(&[
        "summability",
        "--map",
        &data("attracting.json"),
        "--point",
        "-0.16666666666666666,0",
        "--order",
        "80",
    ]);
    assert_eq!(r["verdict"], "divergent-evidence");
}

#[test]
fn ruelle_apply_spot_value() {
    let r = json(&[
        "ruelle-apply",
        "--map",
        &data("z2.json"),
        "--kernel",
        "tau",
        "--base",
        "2,0",
        "--at",
        "1,0",
    ]);
    let e = &r["evaluations"][0];
    assert!(close(&e["closed_form"], -1.0 / 3.0, 0.0, 1e-12));
    assert!(close(&e["preimage_sum"], -1.0 / 3.0, 0.0, 1e-12));
}

#[test]
fn series_kinds_agree_with_fixture_forms() {
    let g = data("g.json");
    let series = |kind: &str| {
        json(&[
            "series",
            "--map",
            &g,
            "--kind",
            kind,
            "--base",
            "-0.3333333333333333,0",
            "--x",
            "0.5,0",
            "--z",
            "2,1",
            "--order",
            "40",
        ])
    };
    // orbit of d = −1/3 lands on 1 where γ vanishes; R*γ_d = −γ_d/2
    let z = num_complex::Complex64::new(2.0, 1.0);
    let d = -1.0 / 3.0;
    let gd = d * (d - 1.0) / (z * (z - 1.0) * (z - d));
    assert!(close(&series("modified")["value"], gd.re, gd.im, 1e-14));
    let rs = gd / 1.25;
    assert!(close(&series("backward")["value"], rs.re, rs.im, 1e-12));
}

#[test]
fn stability_fixture() {
    let r = json(&[
        "stability",
        "--map",
        &data("g.json"),
        "--point",
        "0.3333333333,0",
        "--order",
        "60",
    ]);
    assert_eq!(r["certificate"]["kind"], "unstable-certified");
    assert_eq!(r["triviality"]["trivial"], false);
    assert!(close(&r["coefficients"][0]["value"], -3.0, 0.0, 1e-10));
    assert!(r["certificate"]["sum_margin"].as_f64().unwrap() > 10.0);
}

#[test]
fn rank_examples() {
    let g = data("g.json");
    let one = json(&["rank", "--map", &g, "--points", "0.3333333333,0", "--order", "60"]);
    assert_eq!(
        (one["rank"].as_u64(), one["dimension_bound"].as_u64()),
        (Some(1), Some(1))
    );
    let empty = json(&["rank", "--map", &g]);
    assert_eq!(
        (empty["rank"].as_u64(), empty["dimension_bound"].as_u64()),
        (Some(0), Some(2))
    );
    let dup = json(&["rank", "--map", &g, "--points", "0.3333333333,0;0.3333333333,0"]);
    assert_eq!(dup["rank"].as_u64(), Some(1));
    let cubic = json(&[
        "rank",
        "--map",
        &data("cubic.json"),
        "--points",
        "0.5,0",
        "--points",
        "-0.5,0",
    ]);
    assert_eq!(cubic["rank"].as_u64(), Some(1));
}

#[test]
fn verify_suite_passes_and_is_deterministic() {
    let args = ["verify", "--suite", "lemma4", "--trials", "100", "--seed", "9"];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    let r: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(r["passed"], true);
    assert!(r["worst_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["trials"].as_array().unwrap().len(), 100);
}

#[test]
fn verify_thread_count_does_not_change_output() {
    let args = ["verify", "--suite", "prop6", "--trials", "20", "--seed", "4"];
    let single = Command::new(env!("CARGO_BIN_EXE_ruelle-kit"))
        .args(args)
        .env("RUELLE_KIT_THREADS", "1")
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(single.stdout, stdout(&args).into_bytes());
}

#[test]
fn verify_impossible_tolerance_exits_1() {
    let out = run(&["verify", "--suite", "lemma4", "--trials", "10", "--tol", "1e-16"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
    assert!(r["worst_trial"].is_u64());
}

#[test]
fn orbit_csv() {
    let csv = stdout(&[
        "orbit",
        "--map",
        &data("g.json"),
        "--point",
        "-0.3333333333333333,0",
        "--n",
        "3",
        "--emit",
        "csv",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,re,im,cocycle_re,cocycle_im,|cocycle|");
    assert_eq!(
        &lines[1..],
        [
            "0,-0.3333333333333333,0.0,1.0,0.0,1.0",
            "1,1.0,0.0,-4.0,0.0,4.0",
            "2,1.0,0.0,-16.0,0.0,16.0",
            "3,1.0,0.0,-64.0,0.0,64.0"
        ]
    );

    let single = stdout(&[
        "orbit",
        "--map",
        &data("g.json"),
        "--point",
        "0.2,0",
        "--n",
        "0",
        "--emit",
        "csv",
    ]);
    assert_eq!(single.lines().count(), 2);
}

#[test]
fn grid_csv() {
    let csv = stdout(&[
        "grid",
        "--map",
        &data("z2.json"),
        "--window",
        "-2,2,-2,2",
        "--resolution",
        "100",
        "--emit",
        "csv",
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "row,col,re,im,iterations,escaped");
    assert_eq!(lines.len(), 10_001);
    // row-major from the top-left corner
    assert!(lines[1].starts_with("0,0,-2.0,2.0,"));
    assert!(lines[2].starts_with("0,1,"));
    assert!(lines[101].starts_with("1,0,"));
    // the centre region stays bounded under z²
    let inside = lines[1..].iter().filter(|l| l.ends_with("500,false")).count();
    assert!(inside > 0 && inside < 10_000);
}
