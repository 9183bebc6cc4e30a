use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_augbow"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "augbow {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

/// gen, gridsearch, classify and mcnemar in `dir`.
fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    run(dir, &["--seed", "3", "gen", "--preset", "parking", "-o", "corpus.jsonl"]);
    run(
        dir,
        &[
            "--seed", "3", "gridsearch", "-i", "corpus.jsonl", "--N", "2..3", "--n", "1..2",
            "--splits", "splits.json", "-o", "grid.csv", "--report", "grid.json",
        ],
    );
    run(
        dir,
        &["--seed", "3", "classify", "-i", "corpus.jsonl", "--scheme", "bow", "--splits", "splits.json", "-o", "bow.json"],
    );
    run(
        dir,
        &["--seed", "3", "classify", "-i", "corpus.jsonl", "--N", "3", "--n", "2", "--splits", "splits.json", "-o", "inter.json"],
    );
    run(dir, &["mcnemar", "bow.json", "inter.json", "-o", "mcnemar.json"]);
    ["corpus.jsonl", "splits.json", "grid.csv", "grid.json", "bow.json", "inter.json", "mcnemar.json"]
        .iter()
        .map(|n| ((*n).to_owned(), read(dir, n)))
        .collect()
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        assert!(!x.is_empty(), "{name} is empty");
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn artifacts_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d);
    let corpus: augbow::Corpus = augbow::parse_corpus(&read(d, "corpus.jsonl")[..], 1.0).unwrap();
    assert_eq!(corpus.len(), 200);
    let splits: augbow::learn::Splits = serde_json::from_slice(&read(d, "splits.json")).unwrap();
    assert_eq!(splits.holdout.len() + splits.evaluation.len(), 200);
    let preds: serde_json::Value = serde_json::from_slice(&read(d, "inter.json")).unwrap();
    assert_eq!(preds["predictions"].as_array().unwrap().len(), splits.evaluation.len());
    let grid = String::from_utf8(read(d, "grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 4);

    let report = run(d, &["report", "-i", "inter.json", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(report["accuracy"], preds["accuracy"]);
    run(d, &["report", "-i", "inter.json", "--confusion", "confusion.csv", "--roc", "parking", "--roc-out", "roc.csv"]);
    assert!(read(d, "roc.csv").starts_with(b"threshold"));

    run(d, &["--seed", "1", "encode", "-i", "corpus.jsonl", "-o", "docs.jsonl", "--fitted", "fitted.json"]);
    let docs = String::from_utf8(read(d, "docs.jsonl")).unwrap();
    assert_eq!(docs.lines().count(), 200);
    for line in docs.lines() {
        serde_json::from_str::<augbow::Document>(line).unwrap();
    }
    run(d, &["regex", "-i", "corpus.jsonl", "--regex-count", "5", "-o", "regex.json"]);
    let regex: serde_json::Value = serde_json::from_slice(&read(d, "regex.json")).unwrap();
    assert!(regex["names"].as_array().unwrap().len() <= 5);
    run(d, &["cluster", "-i", "corpus.jsonl", "--scheme", "bow-time", "-o", "clusters.json"]);
    run(d, &["bins", "-i", "corpus.jsonl", "--N", "3", "-o", "bins.json"]);
}

#[test]
fn pyramid_on_single_event_activities() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = "{\"id\":\"a\",\"label\":\"x\",\"events\":[{\"kind\":\"start\",\"start\":0,\"end\":1}]}\n\
                  {\"id\":\"b\",\"label\":\"y\",\"events\":[{\"kind\":\"stop\",\"start\":3,\"end\":5}]}\n";
    std::fs::write(dir.path().join("c.jsonl"), corpus).unwrap();
    for base in ["interspersed", "cumulative"] {
        let out = run(dir.path(), &["encode", "-i", "c.jsonl", "--scheme", "pyramid", "--base", base, "--n", "3"]);
        assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
    }
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing: PathBuf = dir.path().join("nope.jsonl");
    let code = |args: &[&str]| bin().current_dir(dir.path()).args(args).output().unwrap().status.code();
    assert_eq!(code(&["classify", "-i", missing.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["classify", "--no-such-flag"]), Some(2));
    assert_eq!(code(&["gen", "--preset", "unknown"]), Some(2));
    std::fs::write(dir.path().join("bad.jsonl"), "{not json\n").unwrap();
    assert_eq!(code(&["encode", "-i", "bad.jsonl"]), Some(2));
}
