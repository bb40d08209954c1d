use std::path::Path;

use super::run;

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("ntrefftz").chain(args.iter().copied()).map(String::from).collect()
}

fn run_in(out: &Path, args: &[&str]) -> i32 {
    let mut a = args.to_vec();
    let out = out.to_str().unwrap();
    a.extend(["--out", out]);
    run(argv(&a))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(argv(&["--help"])), 0);
    assert_eq!(run(argv(&["trefftz1d", "--help"])), 0);
    assert_eq!(run(argv(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(run_in(&out, &["trefftz1d", "--bogus"]), 2);
    assert_eq!(run_in(&out, &["nosuchcommand"]), 2);
    assert_eq!(run_in(&out, &["bvp1d", "--variant", "sideways"]), 2);
    assert_eq!(run_in(&out, &["trefftz2d", "--preset", "other"]), 2);
    assert_eq!(run(argv(&[])), 2);
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };
    let unknown = cfg("unknown.json", r#"{"n_max": 3, "sigmaa": 0.5}"#);
    let array = cfg("array.json", "[]");
    let broken = cfg("broken.json", "{");
    let bad_sigma = cfg("sigma.json", r#"{"sigma": -1.0}"#);
    let bad_which = cfg("which.json", r#"{"which": 99}"#);
    assert_eq!(run_in(&out, &["trefftz1d", "--config", &unknown]), 2);
    assert_eq!(run_in(&out, &["converge", "--config", &array]), 2);
    assert_eq!(run_in(&out, &["bvp1d", "--config", &broken]), 2);
    assert_eq!(run_in(&out, &["trefftz2d", "--config", &bad_sigma]), 2);
    assert_eq!(run_in(&out, &["interface2d", "--config", &bad_which]), 2);
    assert_eq!(run_in(&out, &["trefftz1d", "--config", "/nonexistent/cfg.json"]), 2);
    assert!(!out.exists());
}

#[test]
fn unconverged_refinement_exits_one_and_keeps_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, r#"{"target_rel_change": 1e-12, "max_cells": 40}"#).unwrap();
    let out = dir.path().join("o");
    let code = run_in(&out, &["bvp1d", "--variant", "whole-domain", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let meta: serde_json::Value = serde_json::from_str(&read(&out, "bvp1d.json")).unwrap();
    assert_eq!(meta["results"]["whole_domain"]["converged"], false);
    assert_eq!(meta["preset"], "paper+tight.json");
}

#[test]
fn switches_recorded_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(run_in(out, &["trefftz1d", "--indexing", "one-through-m"]), 0);
    let csv = read(out, "trefftz1d.csv");
    assert!(csv.contains("# constraint_indexing: one_through_m\n"));
    assert!(csv.contains("# n_funcs: 4\n"));
    assert_eq!(run_in(out, &["bvp1d", "--variant", "nonlocal-only", "--apply-conv-in", "nonlocal-region-only"]), 0);
    assert!(read(out, "bvp1d_nonlocal_only.csv").contains("# apply_conv_in: nonlocal_region_only\n"));
    let meta: serde_json::Value = serde_json::from_str(&read(out, "bvp1d.json")).unwrap();
    assert_eq!(meta["config"]["apply_conv_in"], "nonlocal_region_only");
}

#[test]
fn plot_flag_controls_svg() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain");
    let plotted = dir.path().join("plotted");
    assert_eq!(run_in(&plain, &["converge"]), 0);
    assert_eq!(run_in(&plotted, &["converge", "--plot"]), 0);
    assert!(!plain.join("converge.svg").exists());
    assert!(read(&plotted, "converge.svg").starts_with("<?xml"));
    assert_eq!(read(&plain, "converge.csv"), read(&plotted, "converge.csv"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["selftest"]), 0);
    let meta: serde_json::Value = serde_json::from_str(&read(dir.path(), "selftest.json")).unwrap();
    assert!(meta["results"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn trefftz_set_document_reloads() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["interface2d"]), 0);
    let doc: serde_json::Value = serde_json::from_str(&read(dir.path(), "interface2d_set.json")).unwrap();
    assert_eq!(doc["preset"], "paper");
    let ts = nonlocal_trefftz::TrefftzSet::from_json(&doc["set"].to_string()).unwrap();
    assert_eq!(ts.n_funcs(), 12);
    assert_eq!(ts.x0, [0.25, 0.0]);
}

#[test]
fn every_output_names_preset_and_all_switches() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["bvp1d", "trefftz1d", "trefftz2d", "interface2d", "converge", "selftest"] {
        let out = dir.path().join(cmd);
        assert_eq!(run_in(&out, &[cmd, "--plot"]), 0, "{cmd}");
        for entry in std::fs::read_dir(&out).unwrap() {
            let path = entry.unwrap().path();
            let text = std::fs::read_to_string(&path).unwrap();
            for key in ["preset", "apply_conv_in", "include_local_term", "constraint_indexing"] {
                assert!(text.contains(key), "{} lacks {key}", path.display());
            }
        }
    }
}
