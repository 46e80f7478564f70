use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothlearn")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const DATA: &str = r#"
n = 6
planted = { w = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0], theta = 0.5 }
label_noise = { kind = "rcn", eta = 0.05 }
marginal = { kind = "product", minus_probs = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5] }
"#;

fn experiment_toml(samples: usize) -> String {
    format!(
        "name = \"cli\"\nseed = 2\n\n[data]{DATA}\n[learn]\ndegree = 1\nepsilon = 0.2\ndelta = 0.2\n\
         samples_per_repetition = {samples}\nrepetitions = 3\nvalidation_size = 300\n\n\
         [eval]\ntest_size = 1000\nsigma = 0.05\n\n[sweep]\nseeds = [0, 1]\n"
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn data_learn_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("data.toml");
    std::fs::write(&cfg, DATA).unwrap();
    let data = dir.path().join("train.txt");
    let model = dir.path().join("model.json");
    let o = run(&["gen-data", "--config", s(&cfg), "--count", "2000", "--seed", "5", "--out", s(&data)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&[
        "learn", "--data", s(&data), "--degree", "2", "--repetitions", "3", "--validation-size", "500", "--out",
        s(&model),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["eval", "--model", s(&model), "--data", s(&data)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("error "));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["lemma-check", "--select", "no-such-check"])), 2);
    assert_eq!(code(&run(&["lemma-check", "--profile", "huge"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, experiment_toml(2)).unwrap();
    let out = dir.path().join("r.jsonl");
    assert_eq!(code(&run(&["experiment", "--config", s(&cfg), "--out", s(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn missing_file_is_internal_error() {
    assert_eq!(code(&run(&["eval", "--model", "/nonexistent/m", "--data", "/nonexistent/d"])), 3);
}

#[test]
fn lemma_check_pass_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.jsonl");
    let o = run(&["lemma-check", "--select", "tilting-moment,berry-esseen", "--out", s(&rows)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(std::fs::read_to_string(&rows).unwrap().lines().count() > 3);
    let o = run(&["lemma-check", "--select", "tilting-moment", "--bound-scale", "0.5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn experiment_then_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, experiment_toml(60)).unwrap();
    let out = dir.path().join("r.jsonl");
    let o = run(&["experiment", "--config", s(&cfg), "--out", s(&out), "--workers", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);
    let plots = dir.path().join("plots");
    let o = run(&["emit-plots", "--records", s(&out), "--out-dir", s(&plots)]);
    assert_eq!(code(&o), 0);
    for f in ["error_vs_samples.csv", "error_vs_degree.csv", "error_vs_sigma.csv", "plots.gp"] {
        assert!(plots.join(f).exists(), "{f}");
    }
}
