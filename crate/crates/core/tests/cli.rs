// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn mke(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mke"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs");
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--json", "--no-timing"]);
    let (code, out) = mke(&all);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn qubit_estimate_example() {
    let (code, r) = json(&["qubit", "estimate", "--prior-bloch", "0,0,1", "--dir", "1,0,0", "--mean", "0.6"]);
    assert_eq!(code, 0);
    let v = floats(&r["outputs"]["bloch"]);
    assert!((v[0] - 0.6).abs() < 1e-12 && v[1].abs() < 1e-12 && (v[2] - 0.8).abs() < 1e-12);
}

#[test]
fn oscillator_mean_example() {
    let (code, r) = json(&["oscillator", "mean", "--alpha", "2", "--nbar", "1"]);
    assert_eq!(code, 0);
    let beta = floats(&r["outputs"]["beta"]);
    assert!((beta[0] - 1.0).abs() < 1e-12 && beta[1].abs() < 1e-12);
    assert!((r["outputs"]["lambda"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn infeasible_mean_example() {
    let (code, r) = json(&["estimate", "mean", "--prior", "mixed2.json", "--observable", "sz.json", "--mean", "1.5"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "InfeasibleMean");
    assert_eq!(r["error"]["exit_code"], 2);
}

#[test]
fn reports_are_reproducible() {
    let args = ["simulate", "sample", "--state", "qubit_prior.json", "--shots", "1000", "--seed", "9", "--no-timing"];
    assert_eq!(mke(&args), mke(&args));
    // with timing, everything except the wall-time line matches
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("wall_time_ms")).collect::<Vec<_>>().join("\n");
    let timed = ["qubit", "estimate", "--prior-bloch", "0,0,1", "--dir", "1,0,0", "--mean", "0.6"];
    assert_eq!(strip(mke(&timed).1), strip(mke(&timed).1));
}

#[test]
fn exit_code_paths() {
    let cases: &[(&[&str], i32, &str)] = &[
        (&["estimate", "multi", "--prior", "qubit_prior.json", "--constraints", "constraints.json"], 0, ""),
        (&["estimate", "multi", "--prior", "qubit_prior.json", "--constraints", "constraints_infeasible.json"], 2, "InfeasibleConstraints"),
        (&["qubit", "hamiltonian", "--prior-bloch", "0,0,0.5", "--dir", "0,0,1", "--mean", "0.5"], 2, "NoInformation"),
        (&["qubit", "hamiltonian", "--prior-bloch", "0,0,1", "--dir", "1,0,0", "--mean", "0.1", "--dir", "-1,0,0", "--mean", "-0.1"], 2, "RankDeficient"),
        (&["estimate", "mean", "--prior", "not_a_state.json", "--observable", "sz.json", "--mean", "0"], 3, "NonHermitianInput"),
        (&["estimate", "mean", "--prior", "malformed.json", "--observable", "sz.json", "--mean", "0"], 3, "Parse"),
        (&["estimate", "mean", "--prior", "missing.json", "--observable", "sz.json", "--mean", "0"], 3, "Io"),
        (&["oscillator", "mean", "--alpha", "3", "--nbar", "1", "--cutoff", "5"], 3, "CutoffTooSmall"),
        (&["oscillator", "mean", "--alpha", "1", "--nbar", "-1"], 3, "InvalidMean"),
        (&["estimate", "multi", "--prior", "qubit_prior.json", "--constraints", "constraints.json", "--max-iter", "2", "--tol", "1e-5"], 4, "NonConvergence"),
    ];
    for (args, code, kind) in cases {
        let (c, r) = json(args);
        assert_eq!(c, *code, "{args:?}: {r}");
        if !kind.is_empty() {
            assert_eq!(r["error"]["kind"], *kind, "{args:?}");
        }
    }
}

#[test]
fn usage_error_is_structured() {
    let (code, out) = mke(&["qubit", "estimate", "--dir", "1,0"]);
    assert_eq!(code, 3);
    assert!(out.contains("status: error Usage (exit 3)"));
}

#[test]
fn displacement_and_hierarchy_commands() {
    let (code, r) = json(&["oscillator", "displacement", "--alpha", "1", "--probs", "poisson_2_25.json", "--cutoff", "12"]);
    assert_eq!(code, 0);
    assert!((r["outputs"]["beta"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(r["outputs"]["determination_count"], 144);
    let (_, r) = json(&["oscillator", "displacement", "--alpha", "1", "--probs", "poisson_2_25.json", "--cutoff", "12", "--method", "direct"]);
    assert_eq!(r["outputs"]["determination_count"], 12);

    let (code, r) = json(&["oscillator", "hamiltonian", "--prior", "thermal6.json", "--probs", "thermal6_probs.json", "--time", "0.1"]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["hamiltonian"].is_array());
}

#[test]
fn simulate_then_estimate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let evolved = dir.path().join("evolved.json");
    let probs = dir.path().join("probs.json");
    let ev = evolved.to_str().unwrap();
    let (code, _) = json(&["simulate", "evolve", "--state", "qubit_prior.json", "--hamiltonian", "hamiltonian_x.json", "--time", "0.2", "--output", ev]);
    assert_eq!(code, 0);
    let (code, _) = json(&["simulate", "dist", "--state", ev, "--output", probs.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, r) = json(&["estimate", "dist", "--prior", "qubit_prior.json", "--probs", probs.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["residual"].as_f64().unwrap() < 1e-12);

    let (code, r) = json(&["entropy", "quantum", "--a", ev, "--b", "qubit_prior.json"]);
    assert_eq!(code, 0);
    assert!(r["outputs"]["divergence"].as_f64().unwrap() > 0.0);
    let (_, r) = json(&["entropy", "kl", "--a", "probs_skew.json", "--b", "probs_half.json"]);
    let expected = 0.8 * (1.6f64).ln() + 0.2 * (0.4f64).ln();
    assert!((r["outputs"]["divergence"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn infinite_divergence_is_a_string() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, "[1.0, 0.0]").unwrap();
    std::fs::write(&b, "[0.0, 1.0]").unwrap();
    let (code, r) = json(&["entropy", "kl", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["divergence"], "inf");
}

#[test]
fn qubit_hamiltonian_reports_identity_component_as_indeterminate() {
    let (code, r) = json(&["qubit", "hamiltonian", "--prior-bloch", "0,0,1", "--dir", "1,0,0", "--mean", "0.02", "--time", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(r["outputs"]["h0"], "indeterminate");
    let h = floats(&r["outputs"]["h"]);
    // the only observable direction is τ × n = ŷ
    assert!(h[0].abs() < 1e-12 && h[2].abs() < 1e-12 && h[1] != 0.0);
}
