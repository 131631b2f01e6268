use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_evprofile"));
    c.env_remove("EVPROFILE_OUT_DIR").env("RUST_LOG", "error");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// synth -> extract -> featurize in `dir`.
fn features(dir: &Path, seed: &str) {
    run(
        dir,
        &[
            "synth",
            "--evs",
            "5",
            "--sessions",
            "12",
            "--seed",
            seed,
            "--out",
            "fleet.jsonl",
        ],
    );
    run(
        dir,
        &["extract", "--fleet", "fleet.jsonl", "--out", "tails.jsonl"],
    );
    run(
        dir,
        &[
            "featurize",
            "--tails",
            "tails.jsonl",
            "--out",
            "features.csv",
        ],
    );
}

fn report_lines(path: PathBuf) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn pipeline_smoke_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    features(dir.path(), "1");
    run(
        dir.path(),
        &[
            "evaluate",
            "--features",
            "features.csv",
            "--iterations",
            "2",
            "--out",
            "report.csv",
        ],
    );
    let lines = report_lines(dir.path().join("report.csv"));
    assert_eq!(
        lines[0],
        "model,q,nof,variant,metric,mean,std,n_evs,iterations,seed"
    );
    assert!(lines.len() > 1);
    for name in ["fleet.jsonl", "tails.jsonl", "features.csv", "report.csv"] {
        let m: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("{name}.manifest.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(m["status"], "ok", "{name}");
        assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    }
    assert!(dir.path().join("fleet.jsonl.truth.jsonl").exists());
}

#[test]
fn q_list_gives_five_rows_per_metric_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    features(dir.path(), "2");
    let args = |out: &'static str| {
        vec![
            "evaluate",
            "--features",
            "features.csv",
            "--q",
            "1,2,3,4,5",
            "--iterations",
            "2",
            "--seed",
            "9",
            "--out",
            out,
        ]
    };
    run(dir.path(), &args("a.csv"));
    run(dir.path(), &[&["--jobs", "1"][..], &args("b.csv")].concat());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let lines = report_lines(dir.path().join("a.csv"));
    for metric in ["precision", "recall", "specificity", "f1", "g_mean"] {
        let qs: Vec<&str> = lines[1..]
            .iter()
            .filter(|l| l.split(',').nth(4) == Some(metric))
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(qs, ["1", "2", "3", "4", "5"], "{metric}");
    }
}

#[test]
fn out_dir_variable_sets_default_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(dir.path())
        .env("EVPROFILE_OUT_DIR", "artifacts")
        .args(["synth", "--evs", "2", "--sessions", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("artifacts/fleet.jsonl").exists());
    assert!(dir
        .path()
        .join("artifacts/fleet.jsonl.manifest.json")
        .exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().current_dir(dir.path()).args(args).output().unwrap();

    let o = code(&["synth", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    run(
        dir.path(),
        &["synth", "--evs", "2", "--sessions", "3", "--out", "f.jsonl"],
    );
    let text = std::fs::read_to_string(dir.path().join("f.jsonl")).unwrap();
    let (head, rest) = text.split_once('\n').unwrap();
    let head = head.replace("\"version\":1", "\"version\":7");
    std::fs::write(dir.path().join("old.jsonl"), format!("{head}\n{rest}")).unwrap();
    let o = code(&["extract", "--fleet", "old.jsonl", "--out", "t.jsonl"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    let last = err.lines().last().unwrap();
    assert!(
        last.starts_with("error: code=version_mismatch msg="),
        "{last}"
    );
    let manifest = std::fs::read_to_string(dir.path().join("t.jsonl.manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));

    let o = code(&["extract", "--fleet", "missing.jsonl", "--out", "t.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error: code=io"));

    let o = code(&["evaluate", "--features", "x.csv", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}
