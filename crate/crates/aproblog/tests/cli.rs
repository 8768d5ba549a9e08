//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn aproblog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aproblog"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

#[test]
fn infer_prints_probability_labels() {
    let dir = tempdir();
    let program = dir.join("burglary.pl");
    write(
        &program,
        "alarm :- burglary.\n0.05::burglary.\nquery(alarm).\n",
    );
    let out = aproblog(&["infer", program.to_str().unwrap(), "--semiring", "prob"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "alarm: 0.05\n");
}

#[test]
fn infer_beta_reports_mean_and_variance() {
    let dir = tempdir();
    let program = dir.join("burglary.pl");
    write(
        &program,
        "alarm :- burglary.\n0.05::burglary.\nquery(alarm).\n",
    );
    let out = aproblog(&["infer", program.to_str().unwrap(), "--semiring", "beta"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mean=0.050000"), "{stdout}");
    assert!(stdout.contains("variance=0.000000"), "{stdout}");
}

#[test]
fn help_documents_flags_and_defaults() {
    let out = aproblog(&["experiment", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in [
        "--n-ins",
        "--ground-truths",
        "--reps",
        "--seed",
        "--semirings",
        "--out-dir",
    ] {
        assert!(text.contains(flag), "help missing {flag}");
    }
    assert!(text.contains("default"), "help missing defaults");
    let out = aproblog(&["infer", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("--budget"));
}

#[test]
fn infer_missing_file_exits_one() {
    let out = aproblog(&["infer", "/nonexistent/program.pl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn infer_parse_error_exits_one() {
    let dir = tempdir();
    let program = dir.join("bad.pl");
    write(&program, "0.05:burglary.\n");
    let out = aproblog(&["infer", program.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infer_inference_error_exits_two() {
    let dir = tempdir();
    let program = dir.join("big.pl");
    let mut text = String::new();
    for i in 0..30 {
        text.push_str(&format!("0.5::f{i}.\n"));
    }
    text.push_str("query(f0).\n");
    write(&program, &text);
    let out = aproblog(&["infer", program.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = aproblog(&["infer", program.to_str().unwrap(), "--budget", "30"]);
    assert!(out.status.success());
}

#[test]
fn experiment_writes_deterministic_reports() {
    let dir = tempdir();
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = aproblog(&[
            "experiment",
            "--benchmark",
            "net1",
            "--n-ins",
            "10",
            "--ground-truths",
            "3",
            "--reps",
            "2",
            "--seed",
            "7",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let rmse_a = std::fs::read(out_a.join("rmse.csv")).unwrap();
    let rmse_b = std::fs::read(out_b.join("rmse.csv")).unwrap();
    assert_eq!(rmse_a, rmse_b);
    let cal_a = std::fs::read(out_a.join("calibration.csv")).unwrap();
    let cal_b = std::fs::read(out_b.join("calibration.csv")).unwrap();
    assert_eq!(cal_a, cal_b);

    let rmse = String::from_utf8(rmse_a).unwrap();
    assert!(rmse.starts_with("benchmark,semiring,n_ins,actual,predicted,failed_runs\n"));
    // Two semirings at one n_ins.
    assert_eq!(rmse.lines().count(), 3);
}

#[test]
fn experiment_without_benchmark_exits_two() {
    let out = aproblog(&["experiment"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_accepts_custom_network_and_program() {
    let dir = tempdir();
    let net = dir.join("tiny.json");
    write(
        &net,
        r#"{"name":"tiny","nodes":["a","b"],"parents":{"b":["a"]},
            "roles":{"a":"observed","b":"queried"}}"#,
    );
    let out = aproblog(&[
        "experiment",
        "--network",
        net.to_str().unwrap(),
        "--n-ins",
        "10",
        "--ground-truths",
        "2",
        "--reps",
        "1",
        "--out-dir",
        dir.join("net").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let program = dir.join("tiny.pl");
    write(
        &program,
        "0.5::s.\nq :- s.\nquery(q).\nevidence(s, true).\n",
    );
    let out = aproblog(&[
        "experiment",
        "--program",
        program.to_str().unwrap(),
        "--n-ins",
        "10",
        "--ground-truths",
        "2",
        "--reps",
        "1",
        "--out-dir",
        dir.join("prog").to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_fixtures_writes_four_files_idempotently() {
    let dir = tempdir();
    let fixtures = dir.join("fixtures");
    let out = aproblog(&["gen-fixtures", "--out-dir", fixtures.to_str().unwrap()]);
    assert!(out.status.success());
    let names = ["net1.json", "net2.json", "net3.json", "smokers.pl"];
    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| std::fs::read(fixtures.join(n)).unwrap())
        .collect();
    // Re-running overwrites with identical bytes.
    let out = aproblog(&["gen-fixtures", "--out-dir", fixtures.to_str().unwrap()]);
    assert!(out.status.success());
    for (name, before) in names.iter().zip(&first) {
        assert_eq!(&std::fs::read(fixtures.join(name)).unwrap(), before);
    }

    // The generated fixtures feed back into the other subcommands.
    let out = aproblog(&["infer", fixtures.join("smokers.pl").to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_fixtures_unwritable_target_exits_two() {
    let dir = tempdir();
    let blocker = dir.join("file");
    write(&blocker, "not a directory");
    let out = aproblog(&[
        "gen-fixtures",
        "--out-dir",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "aproblog-cli-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
