use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qsarnet"));
    cmd.args(args).env_remove("QSARNET_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("QSARNET_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args, None);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(args: &[&str]) -> i32 {
    run(args, None).status.code().expect("exit code")
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Small dataset in `dir/data.csv`.
fn small_data(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    ok(&["gen", "--n", "30", "--p", "6", "--seed", "3", "--out", &s(&path)]);
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_writes_sidecars() {
    let tmp = tempfile::tempdir().unwrap();
    let a = small_data(&tmp.path().join("a"));
    let b = small_data(&tmp.path().join("b"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let sidecar = json(&a.with_extension("json"));
    assert_eq!(sidecar["n_rows"], 30);
    assert_eq!(sidecar["n_features"], 6);
    let manifest = json(&tmp.path().join("a/data.manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn gen_argument_errors_are_usage_errors() {
    assert_eq!(code(&["gen", "--p", "0"]), 2);
    assert_eq!(code(&["gen", "--p", "4", "--informative", "5"]), 2);
}

#[test]
fn train_writes_table_row_and_leaves_no_temporaries() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let out = tmp.path().join("qrnn");
    ok(&[
        "train",
        "--data",
        &s(&data),
        "--model",
        "qrnn",
        "--epochs",
        "50",
        "--seed",
        "1",
        "--out",
        &s(&out),
    ]);
    let metrics = json(&out.join("metrics.json"));
    assert_eq!(metrics["model"], "QRNN");
    assert_eq!(metrics["table"]["values"].as_array().unwrap().len(), 10);
    assert_eq!(metrics["test"]["n"], 30 - 23);

    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "metrics.csv",
            "metrics.json",
            "network.json",
            "predictions.csv",
            "scaling.json",
            "trace.csv",
            "train.manifest.json"
        ]
    );
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 51);
}

#[test]
fn zero_momentum_reproduces_plain_descent() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let common = ["--data", &s(&data), "--epochs", "40", "--seed", "9"];
    let plain = tmp.path().join("plain");
    let momentum = tmp.path().join("momentum");
    ok(&[&["train", "--model", "gdbpnn", "--out", &s(&plain)][..], &common].concat());
    ok(&[
        &["train", "--model", "gdbpmnn", "--momentum", "0", "--out", &s(&momentum)][..],
        &common,
    ]
    .concat());
    let (a, b) = (json(&plain.join("metrics.json")), json(&momentum.join("metrics.json")));
    assert_eq!(a["train"], b["train"]);
    assert_eq!(a["test"], b["test"]);
    assert_ne!(a["model"], b["model"]);
}

#[test]
fn train_error_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let d = s(&data);
    let out = s(&tmp.path().join("x"));
    assert_eq!(
        code(&["train", "--data", &d, "--model", "gdbpnn", "--theta", "0.3", "--out", &out]),
        2
    );
    assert_eq!(code(&["train", "--data", &d, "--model", "nope", "--out", &out]), 2);
    assert_eq!(
        code(&["train", "--data", &d, "--model", "gdbpnn", "--eta", "1e6", "--epochs", "50", "--out", &out]),
        4
    );
    assert_eq!(
        code(&[
            "train",
            "--data",
            "/nonexistent/data.csv",
            "--model",
            "gdbpnn",
            "--out",
            &out
        ]),
        3
    );
    assert_eq!(
        code(&["train", "--data", &d, "--target", "missing", "--model", "gdbpnn", "--out", &out]),
        3
    );
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let env_dir = tmp.path().join("from-env");
    let out = run(
        &["train", "--data", &s(&data), "--model", "shlffnn", "--epochs", "5"],
        Some(&env_dir),
    );
    assert!(out.status.success());
    assert!(env_dir.join("metrics.json").is_file());
}

#[test]
fn benchmark_compare_report_on_a_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let bench = tmp.path().join("bench");
    assert_eq!(code(&["benchmark", "--data", &s(&data), "--runs", "3"]), 2);
    assert_eq!(
        code(&[
            "benchmark",
            "--data",
            &s(&data),
            "--models",
            "qrnn",
            "--seed",
            "1",
            "--out",
            &s(&bench)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "benchmark",
            "--data",
            &s(&data),
            "--models",
            "gdbpnn,gdbpnn",
            "--seed",
            "1",
            "--out",
            &s(&bench)
        ]),
        2
    );
    ok(&[
        "benchmark",
        "--data",
        &s(&data),
        "--models",
        "shlffnn,gdbpnn,qrnn",
        "--runs",
        "4",
        "--epochs",
        "20",
        "--seed",
        "5",
        "--jobs",
        "2",
        "--out",
        &s(&bench),
    ]);
    let result = json(&bench.join("benchmark.json"));
    assert_eq!(result["rmse"].as_array().unwrap().len(), 4);
    assert_eq!(result["rmse"][0].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(bench.join("benchmark.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 3 * 2);

    let cmp = tmp.path().join("cmp");
    let text = ok(&[
        "compare",
        "--result",
        &s(&bench.join("benchmark.json")),
        "--out",
        &s(&cmp),
    ]);
    assert!(text.contains("GDBPNN"));
    let report = json(&cmp.join("comparison.json"));
    assert_eq!(report["metrics"].as_array().unwrap().len(), 2);
    assert_eq!(report["metrics"][0]["pairwise"].as_array().unwrap().len(), 3);
    assert_eq!(
        code(&[
            "compare",
            "--result",
            &s(&bench.join("benchmark.json")),
            "--alpha",
            "1.5",
            "--out",
            &s(&cmp)
        ]),
        2
    );

    let rep = tmp.path().join("rep");
    ok(&[
        "report",
        "--result",
        &s(&bench.join("benchmark.json")),
        "--format",
        "csv",
        "--out",
        &s(&rep),
    ]);
    assert!(rep.join("box_stats.csv").is_file());
    assert!(rep.join("tukey_intervals.csv").is_file());
    assert!(!rep.join("boxplots.svg").exists());
    assert_eq!(
        code(&[
            "report",
            "--result",
            &s(&bench.join("benchmark.json")),
            "--format",
            "pdf"
        ]),
        2
    );
}

#[test]
fn benchmark_is_independent_of_job_count() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_data(tmp.path());
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let out = tmp.path().join(format!("jobs{jobs}"));
        ok(&[
            "benchmark",
            "--data",
            &s(&data),
            "--models",
            "gdbpnn,bpwdnn",
            "--runs",
            "3",
            "--epochs",
            "15",
            "--seed",
            "11",
            "--jobs",
            jobs,
            "--out",
            &s(&out),
        ]);
        outputs.push(fs::read(out.join("benchmark.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn malformed_inputs_are_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["compare", "--result", &s(&bad), "--out", &s(tmp.path())]), 3);
    assert_eq!(code(&["report", "--result", &s(&bad), "--out", &s(tmp.path())]), 3);
    assert_eq!(code(&["compare", "--result", &s(&tmp.path().join("absent.json"))]), 3);
}
