use std::process::{Command, Output};

use serde_json::Value;

fn framedrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framedrep"))
        .args(args)
        .env_remove("FRAMEDREP_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn dims_reports_the_rank_split() {
    let out = framedrep(&["--output", "json", "dims", "--n", "2", "--m", "2", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["rank_L"], 6);
    assert_eq!(v["rank_N"], 5);
    assert_eq!(v["rank_quotient"], 1);
    assert_eq!(v["vandermonde"]["holds"], true);
}

#[test]
fn compact_and_pretty_output_parse_to_the_same_document() {
    let args = ["dims", "--n", "3", "--m", "1", "--r", "2"];
    let pretty = framedrep(&args);
    let compact = framedrep(&[&["--output", "json"][..], &args[..]].concat());
    assert_eq!(json_of(&pretty), json_of(&compact));
    assert_eq!(String::from_utf8_lossy(&compact.stdout).trim().lines().count(), 1);
}

#[test]
fn empty_word_gives_identity_matrix() {
    let out = framedrep(&["--output", "json", "burau", "--n", "2", "--r", "1", "--word", ""]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["matrix"]["dim"], 4);
    let text = &v["matrix"]["entries_text"];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(text[i][j], if i == j { "1" } else { "0" });
        }
    }
}

#[test]
fn reduced_matrix_is_smaller() {
    let out = framedrep(&["--output", "json", "burau", "--n", "3", "--r", "2", "--word", "s1 t2^-1", "--reduced"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["matrix"]["dim"], 8);
}

#[test]
fn twist_invariant_is_one_minus_q() {
    let out = framedrep(&["--output", "json", "invariant", "--n", "1", "--r", "2", "--word", "t1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["value"], "1 - q");
}

#[test]
fn bad_generator_is_a_domain_error() {
    let out = framedrep(&["invariant", "--n", "2", "--r", "1", "--word", "s3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn missing_arguments_are_usage_errors() {
    assert_eq!(framedrep(&["dims", "--n", "2"]).status.code(), Some(2));
    assert_eq!(framedrep(&["frobnicate"]).status.code(), Some(2));
    let bad_kappa = framedrep(&["monodromy", "--n", "1", "--r", "1", "--m", "0", "--lambda", "0.3", "--kappa", "x"]);
    assert_eq!(bad_kappa.status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_framedrep"))
        .args(["dims", "--n", "2", "--m", "1", "--r", "1"])
        .env("FRAMEDREP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_framedrep"))
        .args(["--output", "json", "dims", "--n", "2", "--m", "1", "--r", "1"])
        .env("FRAMEDREP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn flatness_residuals_are_small() {
    let out = framedrep(&[
        "--output", "json", "flatness", "--n", "2", "--r", "1,2", "--m", "1", "--lambda", "0.3", "--kappa", "7/2",
        "--samples", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-9);
    assert!(v["singular_restriction"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 10);
}

#[test]
fn monodromy_representation_closes() {
    let out = framedrep(&[
        "--output", "json", "monodromy", "--n", "2", "--r", "1", "--m", "1", "--lambda", "0.37", "--kappa", "3.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["dim"], 3);
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
    assert!(v["max_relation_defect"].as_f64().unwrap() < 1e-6);
}

#[test]
fn conjecture_lists_orientations() {
    let out = framedrep(&["--output", "json", "conjecture", "--n", "1", "--r", "1", "--lambda", "0.37", "--kappa", "3.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["orientations"].as_array().unwrap().len(), 4);
    assert!(v["summary"].as_str().unwrap().contains("sigma_cw_tau_cw"));
}

#[test]
fn selftest_filter_runs_one_criterion() {
    let out = framedrep(&["--output", "json", "selftest", "--only", "rank"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 1);
    assert_eq!(v["passed"], true);
}
