use std::path::{Path, PathBuf};
use std::process::Command;

use efect::cli;
use efect::read_sample;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["efect"];
    full.extend_from_slice(args);
    let code = cli::run(&full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_string()
    }
}

fn simulate(dir: &Dir, model: &str, n: usize, seed: u64, name: &str) -> String {
    let out = dir.path(name);
    let (code, _, err) = run(&["simulate", "--model", model, "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", &out]);
    assert_eq!(code, 0, "{err}");
    out
}

#[test]
fn simulate_writes_requested_runs() {
    let dir = Dir::new();
    let path = simulate(&dir, "constant", 4, 1, "s.json");
    let s = read_sample(Path::new(&path)).unwrap();
    assert_eq!(s.run_count(), 4);
    assert_eq!(s.variable_names(), ["S", "I", "R"]);
}

#[test]
fn simulate_is_byte_identical() {
    let dir = Dir::new();
    let a = simulate(&dir, "seir_ssa", 20, 4, "a.json");
    let b = simulate(&dir, "seir_ssa", 20, 4, "b.json");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn custom_times_and_overrides() {
    let dir = Dir::new();
    let out = dir.path("s.json");
    let (code, _, err) = run(&[
        "simulate", "--model", "sir", "--n", "2", "--seed", "1", "--times", "0,5,7.5", "--set", "I=50",
        "--out", &out,
    ]);
    assert_eq!(code, 0, "{err}");
    let s = read_sample(Path::new(&out)).unwrap();
    assert_eq!(s.times(), [0.0, 5.0, 7.5]);
    assert_eq!(s.value(0, 1, 0), 50.0);
}

#[test]
fn unknown_model_lists_valid_ids() {
    let dir = Dir::new();
    let (code, _, err) = run(&["simulate", "--model", "bogus", "--n", "4", "--seed", "1", "--out", &dir.path("x.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("sir") && err.contains("constant"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["simulate", "--model", "sir"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    let dir = Dir::new();
    let (code, _, _) = run(&["simulate", "--model", "sir", "--n", "0", "--seed", "1", "--out", &dir.path("x.json")]);
    assert_eq!(code, 2);
    assert_eq!(run(&["repro", "--sample", &dir.path("missing.json"), "--seed", "1"]).0, 2);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    for cmd in ["simulate", "repro", "grow", "report", "verify", "compare"] {
        assert!(out.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn repro_on_constant_sample() {
    let dir = Dir::new();
    let s = simulate(&dir, "constant", 10, 1, "s.json");
    let (code, out, _) = run(&["repro", "--sample", &s, "--seed", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["mean"], 0.0);
    assert_eq!(v["meets_target"], true);
    assert_eq!(v["sample_size"], 10);
}

#[test]
fn repro_rejects_odd_sample() {
    let dir = Dir::new();
    let s = simulate(&dir, "constant", 5, 1, "s.json");
    let (code, _, err) = run(&["repro", "--sample", &s, "--seed", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("even"), "{err}");
}

#[test]
fn repro_sir_magnitude() {
    let dir = Dir::new();
    let s = simulate(&dir, "sir", 20_000, 1, "s.json");
    let (code, out, _) = run(&["repro", "--sample", &s, "--seed", "3", "--sigfigs", "6"]);
    assert_eq!(code, 0);
    let mean = json(&out)["mean"].as_f64().unwrap();
    assert!((0.01..0.1).contains(&mean), "mean {mean}");
}

#[test]
fn repro_unsettled_exits_1() {
    let dir = Dir::new();
    let s = simulate(&dir, "sir", 100, 1, "s.json");
    let (code, out, _) = run(&["repro", "--sample", &s, "--seed", "3", "--rel-tol", "1e-9", "--max-evals", "20"]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(v["converged"], false);
    assert_eq!(v["count"], 20);
}

#[test]
fn grow_constant_accepts_immediately() {
    let dir = Dir::new();
    let (sample, report) = (dir.path("g.json"), dir.path("r.json"));
    let (code, out, _) = run(&["grow", "--model", "constant", "--seed", "1", "--out", &sample, "--report", &report]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["sample_size"], 100);
    assert_eq!(v["history"].as_array().unwrap().len(), 1);
    efect::read_report(Path::new(&report)).unwrap();
}

#[test]
fn grow_over_budget_exits_1_with_history() {
    let dir = Dir::new();
    let (sample, report) = (dir.path("g.json"), dir.path("r.json"));
    let (code, out, err) = run(&[
        "grow", "--model", "sir", "--seed", "1", "--budget", "100", "--out", &sample, "--report", &report,
    ]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(v["accepted"], false);
    assert_eq!(v["history"][0]["size"], 100);
    assert!(err.contains("budget"));
    assert!(!PathBuf::from(&report).exists());
}

#[test]
fn grow_sir_history_decreases_and_report_validates() {
    let dir = Dir::new();
    let (sample, report) = (dir.path("g.json"), dir.path("r.json"));
    let (code, out, _) = run(&["grow", "--model", "sir", "--seed", "2", "--out", &sample, "--report", &report]);
    assert_eq!(code, 0);
    let v = json(&out);
    let uppers: Vec<f64> = v["history"].as_array().unwrap().iter().map(|h| h["upper"].as_f64().unwrap()).collect();
    assert!(uppers.windows(2).all(|w| w[1] < w[0]), "{uppers:?}");
    assert!(*uppers.last().unwrap() < 0.075);
    let r = efect::read_report(Path::new(&report)).unwrap();
    assert_eq!(r.sample_size as u64, v["sample_size"].as_u64().unwrap());
    assert_eq!(r.significant_figures, 6);
}

#[test]
fn report_then_self_verify() {
    let dir = Dir::new();
    let s = simulate(&dir, "birth_death_ssa", 2000, 1, "s.json");
    let r = dir.path("r.json");
    let (code, out, _) = run(&["report", "--sample", &s, "--seed", "9", "--out", &r, "--model", "birth_death_ssa"]);
    assert_eq!(code, 0);
    assert!(json(&out)["mean"].as_f64().unwrap() > 0.0);
    let (code, out, _) = run(&["verify", "--report", &r, "--sample", &s, "--seed", "9"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["delta_xy"], 0.0);
    assert_eq!(v["p_value"], 1.0);
}

#[test]
fn verify_detects_scaled_input() {
    let dir = Dir::new();
    let (sample, report) = (dir.path("g.json"), dir.path("r.json"));
    assert_eq!(run(&["grow", "--model", "sir", "--seed", "3", "--out", &sample, "--report", &report]).0, 0);
    let (code, out, _) = run(&["verify", "--report", &report, "--model", "sir", "--seed", "40"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["verify", "--report", &report, "--model", "sir", "--scale-input", "beta=1.25", "--seed", "40"]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(json(&out)["reproduced"], false);
}

#[test]
fn verify_rejects_mismatched_metadata() {
    let dir = Dir::new();
    let s = simulate(&dir, "constant", 100, 1, "s.json");
    let r = dir.path("r.json");
    assert_eq!(run(&["report", "--sample", &s, "--seed", "1", "--out", &r]).0, 0);
    let other = simulate(&dir, "oscillator_pair", 100, 1, "o.json");
    assert_eq!(run(&["verify", "--report", &r, "--sample", &other, "--seed", "1"]).0, 2);
    let small = simulate(&dir, "constant", 50, 1, "small.json");
    assert_eq!(run(&["verify", "--report", &r, "--sample", &small, "--seed", "1"]).0, 2);
    let garbage = dir.path("garbage.json");
    std::fs::write(&garbage, "{\"format_version\": \"efect-report/1\"}").unwrap();
    assert_eq!(run(&["verify", "--report", &garbage, "--sample", &s, "--seed", "1"]).0, 2);
}

#[test]
fn compare_symmetric_and_structural() {
    let dir = Dir::new();
    let a = simulate(&dir, "sir", 200, 1, "a.json");
    let b = simulate(&dir, "constant", 200, 1, "b.json");
    let (code, ab, _) = run(&["compare", "--a", &a, "--b", &b]);
    assert_eq!(code, 0);
    let (_, ba, _) = run(&["compare", "--a", &b, "--b", &a]);
    assert_eq!(ab, ba);
    assert!(json(&ab)["delta"].as_f64().unwrap() > 1.0);
    let (_, aa, _) = run(&["compare", "--a", &a, "--b", &a]);
    assert_eq!(json(&aa)["delta"], 0.0);
    assert_eq!(json(&aa)["per_variable"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_rejects_mismatch() {
    let dir = Dir::new();
    let a = simulate(&dir, "sir", 10, 1, "a.json");
    let b = simulate(&dir, "birth_death_ssa", 10, 1, "b.json");
    assert_eq!(run(&["compare", "--a", &a, "--b", &b]).0, 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = Dir::new();
    let s = simulate(&dir, "seir_ssa", 300, 2, "s.json");
    let one = run(&["--threads", "1", "repro", "--sample", &s, "--seed", "5"]);
    let four = run(&["--threads", "4", "repro", "--sample", &s, "--seed", "5"]);
    assert_eq!(one.1, four.1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_efect");
    let dir = Dir::new();
    let status = Command::new(bin)
        .args(["simulate", "--model", "bogus", "--n", "2", "--seed", "1", "--out", &dir.path("x.json")])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let ok = Command::new(bin)
        .args(["simulate", "--model", "constant", "--n", "2", "--seed", "1", "--out", &dir.path("x.json")])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(json(&String::from_utf8(ok.stdout).unwrap())["run_count"] == 2);
}
