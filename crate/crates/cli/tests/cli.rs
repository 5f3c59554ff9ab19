//! End-to-end runs of the `trajdk` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn trajdk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trajdk"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    trajdk().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn gen_then_detect_reaches_perfect_auc() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["gen", "--kind", "dense-sparse-103", "--seed", "7", "--out", "d.csv"]);
    assert!(out.status.success(), "{out:?}");
    let out = run(
        dir.path(),
        &[
            "detect", "--input", "d.csv", "--scheme", "ik", "--detector", "idk2", "--psi", "64",
            "--psi2", "32", "--t2", "1600", "--seed", "7", "--labels", "d.labels.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).trim(), "auc 1");
}

#[test]
fn eval_with_single_class_labels_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("scores.csv"), "id,score\na,0.5\nb,0.2\n").unwrap();
    std::fs::write(dir.path().join("labels.csv"), "id,label\na,0\nb,0\n").unwrap();
    let out = run(dir.path(), &["eval", "--scores", "scores.csv", "--labels", "labels.csv"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("metric error"));
}

#[test]
fn oversized_psi_is_a_parameter_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = vec!["id,t,x,y".to_string()];
    for i in 0..10 {
        rows.push(format!("a,{i},{},0.5", i as f64 / 10.0));
    }
    std::fs::write(dir.path().join("tiny.csv"), rows.join("\n")).unwrap();
    let out = run(dir.path(), &["detect", "--input", "tiny.csv", "--psi", "4096"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameter error"));
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["detect", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "{stderr}");
}

#[test]
fn missing_input_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["detect", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn external_score_file_is_ranked_and_evaluated() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["gen", "--kind", "separable-singleton", "--n", "6", "--seed", "1", "--out", "s.csv"]);
    // A third-party detector that nails the singleton.
    let mut rows = vec!["id,score".to_string(), "anom,9.5".to_string()];
    for i in 0..5 {
        rows.push(format!("n{i},0.{i}"));
    }
    std::fs::write(dir.path().join("external.csv"), rows.join("\n")).unwrap();
    let out = run(
        dir.path(),
        &[
            "detect", "--input", "s.csv", "--scores", "external.csv", "--polarity", "anomaly",
            "--labels", "s.labels.csv", "--out", "rank.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).trim(), "auc 1");
    let ranked = std::fs::read_to_string(dir.path().join("rank.csv")).unwrap();
    let first_row = ranked.lines().nth(2).unwrap();
    assert!(first_row.starts_with("anom,"), "{first_row}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("conf.json"), r#"{"kind": "separable-singleton", "n": 5}"#).unwrap();
    // kind comes from the config file; n is overridden on the line.
    let out = run(
        dir.path(),
        &["gen", "--kind", "separable-singleton", "--config", "conf.json", "--n", "8", "--seed", "2", "--out", "g.csv"],
    );
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let ids: std::collections::BTreeSet<&str> = text
        .lines()
        .skip(2)
        .filter_map(|l| l.split(',').next())
        .collect();
    assert_eq!(ids.len(), 8);
}

/// Acceptance criterion 10: identical seeds produce byte-identical output
/// files regardless of the worker count.
#[test]
fn criterion_10_determinism_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run_pipeline = |tag: &str, workers: &str| -> Vec<PathBuf> {
        let base = dir.path().join(tag);
        std::fs::create_dir_all(&base).unwrap();
        let w = &["--workers", workers][..];
        let ok = |out: Output| assert!(out.status.success(), "{out:?}");
        ok(run(&base, &[&["gen", "--kind", "dense-sparse-103", "--seed", "9", "--out", "d.csv"], w].concat()));
        ok(run(
            &base,
            &[&[
                "detect", "--input", "d.csv", "--scheme", "ik", "--detector", "idk2", "--psi",
                "64", "--seed", "9", "--out", "ranking.csv",
            ], w]
            .concat(),
        ));
        ok(run(
            &base,
            &[&["embed", "--input", "d.csv", "--scheme", "ik", "--psi", "16", "--seed", "9", "--out", "emb.csv"], w].concat(),
        ));
        ok(run(&base, &[&["gen", "--kind", "cross-style", "--n", "95", "--seed", "9", "--out", "c.csv"], w].concat()));
        ok(run(
            &base,
            &[&[
                "mine", "--input", "c.csv", "--clusters", "c.clusters.csv", "--psi", "16",
                "--gamma", "0.01", "--seed", "9", "--out", "patterns.json",
            ], w]
            .concat(),
        ));
        ok(run(
            &base,
            &[&[
                "subtraj", "--input", "d.csv", "--labels", "d.labels.csv", "--query-id", "40",
                "--psi", "64", "--tau", "0.02", "--seed", "9", "--out", "report.json",
                "--points-csv", "points.csv",
            ], w]
            .concat(),
        ));
        ["d.csv", "d.labels.csv", "ranking.csv", "emb.csv", "c.csv", "c.clusters.csv", "patterns.json", "report.json", "points.csv"]
            .iter()
            .map(|f| base.join(f))
            .collect()
    };
    let first = run_pipeline("w1", "1");
    let second = run_pipeline("w4", "4");
    for (a, b) in first.iter().zip(&second) {
        let left = std::fs::read(a).unwrap();
        let right = std::fs::read(b).unwrap();
        let ok = left == right;
        println!(
            "[{}] criterion 10: byte-identical {} across worker counts",
            if ok { "PASS" } else { "FAIL" },
            a.file_name().unwrap().to_string_lossy()
        );
        assert!(ok, "{} differs between worker counts", a.display());
    }
}
