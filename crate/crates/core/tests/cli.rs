use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn abconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn bundled(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "instances", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn reproduce_prints_matching_table() {
    for name in ["ex4.7", "ex4.7-reversed", "ex4.8", "ex5.6", "ex6.10", "zero"] {
        let out = abconv(&["reproduce", name]);
        assert!(out.status.success(), "{name}");
        let text = stdout(&out);
        assert!(!text.contains("MISMATCH"), "{name}:\n{text}");
        assert!(text.contains("rows match"));
    }
}

#[test]
fn reproduce_shows_the_unmet_support_row() {
    let out = abconv(&["reproduce", "ex6.11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("support zero-gap check")).unwrap();
    assert!(line.ends_with("MISMATCH"), "{line}");
}

#[test]
fn gap_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = abconv(&["gap", &bundled("ex4.7.json"), "--json", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("conjugate dual"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["primal", "dcp", "ld", "lp", "gap", "flags", "attaining_psi", "certificates"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!((v["primal"].as_f64().unwrap() - 0.8).abs() < 1e-9);
    assert_eq!(v["flags"]["weak_duality_violated"], false);
}

#[test]
fn gap_reports_are_byte_identical() {
    let a = abconv(&["gap", "catalog:ex4.8"]);
    let b = abconv(&["gap", &bundled("ex4.8.json")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn conjugate_engines_agree() {
    let closed = stdout(&abconv(&["conjugate", "catalog:ex4.7", "--phi", "a=0,u=1.6,c=0", "--engine", "closed"]));
    let grid = stdout(&abconv(&["conjugate", "catalog:ex4.7", "--phi", "a=0,u=1.6,c=0", "--engine", "grid"]));
    let value = |s: &str| -> f64 {
        s.lines().find(|l| l.starts_with("value")).unwrap().split_whitespace().last().unwrap().parse().unwrap()
    };
    assert!((value(&closed) + 0.96).abs() < 1e-12);
    assert!((value(&grid) + 0.96).abs() < 1e-6);
}

#[test]
fn conjugate_of_g_can_be_infinite() {
    let out = abconv(&["conjugate", "catalog:ex4.8", "--phi", "a=-0.5,u=0", "--target", "g"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().next().unwrap().ends_with("inf"));
}

#[test]
fn certify_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(&good, r#"{"eps": 1e-3, "x": [-2, 3], "phi": {"a": 0, "u": [0, 0]}, "psi": {"a": -1, "u": [2]}}"#).unwrap();
    let out = abconv(&["certify", "catalog:ex4.8", "--cert", good.to_str().unwrap(), "--kind", "conjugate-bound"]);
    assert!(out.status.success(), "{}", stdout(&out));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"eps": 1e-3, "x": [0, 0], "phi": {"a": 0, "u": [0, 0]}, "psi": {"a": -1, "u": [2]}}"#).unwrap();
    let out = abconv(&["certify", "catalog:ex4.8", "--cert", bad.to_str().unwrap(), "--kind", "conjugate-bound"]);
    assert_eq!(out.status.code(), Some(1));

    let opt = dir.path().join("opt.json");
    fs::write(&opt, r#"{"x": [-0.2], "phi": {"a": 0, "u": [1.6]}, "psi": {"a": 0, "u": [-1.6]}}"#).unwrap();
    let out = abconv(&["certify", "catalog:ex4.7", "--cert", opt.to_str().unwrap(), "--kind", "optimality"]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn strong_splits_the_epigraph_point() {
    let out = abconv(&["strong", "catalog:ex5.6", "--epi-point", "a=0,u=1:1,c=0,r=1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("f part in epi f*: true") && text.contains("g part in epi g*: true"), "{text}");
}

#[test]
fn lagrange_with_probe_and_intersection() {
    let out = abconv(&[
        "lagrange",
        "catalog:ex6.11",
        "--lsc-probe",
        "--intersection",
        "a=1,u=0,c=0",
        "a=1,u=2,c=0",
        "-2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lsc at 0"));
    assert!(text.contains("intersection property holds"), "{text}");
}

#[test]
fn random_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"n": 2, "m": 3, "f_modulus": [0.5, 1.0]}"#).unwrap();
    let a = abconv(&["random", "--seed", "42", "--spec", spec.to_str().unwrap()]);
    let b = abconv(&["random", "--seed", "42", "--spec", spec.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = dir.path().join("inst.json");
    assert!(abconv(&["random", "--seed", "42", "-o", out.to_str().unwrap()]).status.success());
    assert!(abconv(&["gap", out.to_str().unwrap()]).status.success());
}

#[test]
fn exit_codes() {
    let fixture: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", "malformed_row.json"].iter().collect();
    let out = abconv(&["gap", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("f.A[0]"));

    assert_eq!(abconv(&["gap", "/nonexistent/instance.json"]).status.code(), Some(2));
    assert_eq!(abconv(&["reproduce", "ex9.9"]).status.code(), Some(4));
    assert_eq!(abconv(&["gap", "catalog:ex9.9"]).status.code(), Some(4));
    assert_eq!(abconv(&["conjugate", "catalog:ex4.7", "--phi", "a=0,u=oops"]).status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_results() {
    let one = Command::new(env!("CARGO_BIN_EXE_abconv"))
        .args(["gap", "catalog:ex6.10"])
        .env("ABCONV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(one.stdout, abconv(&["gap", "catalog:ex6.10"]).stdout);
}
