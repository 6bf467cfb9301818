use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scsvm() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scsvm"));
    cmd.env_remove("SCSVM_DATA_DIR").env("RUST_LOG", "error");
    cmd
}

fn run(args: &[&str]) -> Output {
    scsvm().args(args).output().expect("binary runs")
}

fn bundled(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(format!("{name}.svm"))
        .to_string_lossy()
        .into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Trains on the separable toy set with a growing penalty so the run converges.
fn train_toy(dir: &Path) -> PathBuf {
    let model = dir.join("toy.model");
    let out = run(&[
        "train",
        "--data",
        &bundled("toy_separable"),
        "--sr",
        "0.05",
        "--rho-growth",
        "2",
        "--model",
        path_str(&model),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    model
}

#[test]
fn train_writes_model_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy(dir.path());
    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.lines().next().unwrap().starts_with("2 "));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("toy.model.report.json")).unwrap()).unwrap();
    assert_eq!(report["termination"], "converged");
    assert_eq!(report["total_cg"], 0);
    let history = report["history"].as_array().unwrap();
    assert_eq!(history.len() as u64, report["outer_iters"].as_u64().unwrap() + 1);
}

#[test]
fn train_json_is_a_single_document() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m");
    let out = run(&[
        "train", "--data", "gauss_overlap", "--s", "20", "--max-outer", "5", "--model", path_str(&model),
        "--test-fraction", "0.25", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["s"], 20);
    assert_eq!(v["n"], 300);
    assert_eq!(v["k"], 5);
    assert_eq!(v["converged"], false);
    assert!(v["test_accuracy_pct"].is_number());
}

#[test]
fn budget_flags_conflict() {
    let out = run(&["train", "--data", "toy_separable", "--sr", "0.1", "--s", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m");
    for args in [
        vec!["train", "--data", "toy_separable", "--sr", "1.5"],
        vec!["train", "--data", "toy_separable", "--rho", "-1"],
        vec!["train", "--data", "toy_separable", "--s", "100000"],
        vec!["train", "--data", "/no/such/file.svm"],
    ] {
        let mut args = args.clone();
        args.extend(["--model", path_str(&model)]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!model.exists());
}

#[test]
fn help_exits_zero() {
    for sub in ["train", "predict", "eval", "bench", "stats"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("Usage"));
    }
    let bare = run(&[]);
    assert_eq!(bare.status.code(), Some(1));
}

#[test]
fn eval_and_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy(dir.path());
    let data = bundled("toy_separable");

    let out = run(&["eval", "--model", path_str(&model), "--data", &data, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 200);
    assert_eq!(v["accuracy_pct"].as_f64().unwrap() + v["error_rate_pct"].as_f64().unwrap(), 100.0);

    let out = run(&["predict", "--model", path_str(&model), "--data", &data]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,score"));
    let preds: Vec<(i32, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(preds.len(), 200);
    assert!(preds.iter().all(|&(l, s)| (l == 1) == (s >= 0.0)));
}

#[test]
fn wrong_dimension_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = train_toy(dir.path());
    let out = run(&["eval", "--model", path_str(&model), "--data", &bundled("gauss_overlap")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
    let out = run(&["predict", "--model", path_str(&model), "--data", &bundled("sparse_binary")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stats_table() {
    let out = run(&["stats", &bundled("toy_separable"), &bundled("sparse_binary")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "name,n,m,nnz,density\ntoy_separable,200,2,400,100.00\nsparse_binary,800,150,11200,9.33\n"
    );
    let out = run(&["stats", "--format", "json", &bundled("gauss_overlap")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["m"], 10);
}

#[test]
fn bench_covers_the_bundled_grid() {
    let out = run(&["bench", "--max-outer", "15"]);
    // the cap is far too small to meet the stopping rule
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dataset,sr,k,cg,time_s,accuracy_pct,train_misclassified,s");
    assert_eq!(lines.len(), 1 + 18);
    let srs: Vec<&str> = lines[1..7].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(srs, ["1%", "5%", "10%", "15%", "25%", "50%"]);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 8);
        assert_eq!(f[2], "15");
        if f[0] != "sparse_binary" {
            assert_eq!(f[3], "0", "{line}");
        }
    }
}

#[test]
fn bench_records_missing_datasets_and_continues() {
    let out = run(&["bench", "toy_separable", "/no/such/file.svm", "--sr-grid", "0.1", "--max-outer", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("toy_separable,10%,3,0,"));
    assert_eq!(lines[2], "/no/such/file.svm,10%,,,,,,");
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn bench_json_and_baseline_columns() {
    let out = run(&[
        "bench", "gauss_overlap", "--sr-grid", "0.05,0.5", "--max-outer", "4", "--compare-dcd", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["s"], 16);
    assert_eq!(rows[1]["s"], 160);
    assert!(rows[0]["dcd"]["accuracy_pct"].is_number());
    assert!(rows[0]["report"]["history"].as_array().unwrap().len() == 5);

    let out = run(&["bench", "gauss_overlap", "--sr-grid", "0.1", "--max-outer", "2", "--compare-dcd"]);
    let text = stdout(&out);
    assert!(text.starts_with("dataset,sr,k,cg,time_s,accuracy_pct,train_misclassified,s,dcd_time_s,dcd_accuracy_pct\n"));
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 10);
}

#[test]
fn bench_is_deterministic_apart_from_timing() {
    let strip = |out: Output| -> Vec<String> {
        stdout(&out)
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(4);
                f.join(",")
            })
            .collect()
    };
    let args = ["bench", "--sr-grid", "0.01,0.25", "--max-outer", "10", "--jobs", "3"];
    assert_eq!(strip(run(&args)), strip(run(&args)));
}

#[test]
fn data_dir_lookup_by_name() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(bundled("toy_separable"), dir.path().join("mytoy.svm")).unwrap();
    let model = dir.path().join("m");
    let out = scsvm()
        .env("SCSVM_DATA_DIR", dir.path())
        .args(["train", "--data", "mytoy", "--s", "5", "--rho-growth", "2", "--model", path_str(&model)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# defaults\nmax_outer = 3\ns = 7\n").unwrap();
    let model = dir.path().join("m");
    let base = ["--config", path_str(&cfg), "train", "--data", "toy_separable", "--format", "json", "--model", path_str(&model)];

    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&base))).unwrap();
    assert_eq!((v["k"].as_u64(), v["s"].as_u64()), (Some(3), Some(7)));

    let mut args = base.to_vec();
    args.extend(["--max-outer", "4"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    assert_eq!(v["k"], 4);

    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(run(&base).status.code(), Some(1));
}
