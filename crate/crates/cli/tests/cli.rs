use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnn")).args(args).output().expect("binary runs")
}

fn hnn_env(args: &[&str], key: &str, value: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnn")).args(args).env(key, value).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Ten correlated features plus a target, from a fixed pseudo-random stream.
fn tabular_csv(dir: &Path) -> PathBuf {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut text = (1..=10).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",") + ",y\n";
    for _ in 0..300 {
        let f = next();
        let x: Vec<f64> = (0..10).map(|i| f * (i % 3) as f64 + next()).collect();
        let y = x[0] - 0.5 * x[3] + x[1] * x[2];
        let row: Vec<String> = x.iter().chain([y].iter()).map(|v| format!("{v:.6}")).collect();
        text += &(row.join(",") + "\n");
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    path
}

fn series_csv(dir: &Path) -> PathBuf {
    let mut text = String::from("a,b,c,d\n");
    for t in 0..400 {
        let s = (t as f64 * std::f64::consts::TAU / 12.0).sin();
        let row: Vec<String> = (0..4).map(|k| format!("{:.6}", s * (k + 1) as f64 + 0.1 * ((t * (k + 3)) % 7) as f64)).collect();
        text += &(row.join(",") + "\n");
    }
    let path = dir.join("series.csv");
    fs::write(&path, text).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let o = hnn(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("tabular"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hnn(&["graph", "build"]).status.code(), Some(2));
    assert_eq!(hnn(&["tabular", "train", "--bogus"]).status.code(), Some(2));
}

#[test]
fn missing_input_names_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nowhere.csv");
    let out = dir.path().join("g.json");
    let o = hnn(&["graph", "build", "--input", s(&missing), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere.csv"), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[io]"), "{}", stderr(&o));
}

#[test]
fn graph_build_writes_tmfg_and_manifest() {
    let dir = TempDir::new().unwrap();
    let csv = tabular_csv(dir.path());
    let out = dir.path().join("graph.json");
    let hasse = dir.path().join("hasse.json");
    let o = hnn(&["graph", "build", "--input", s(&csv), "--target", "y", "--out", s(&out), "--hasse", s(&hasse)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = json(&dir.path().join("graph.manifest.json"));
    assert_eq!(manifest["metrics"]["vertices"], 10);
    assert_eq!(manifest["metrics"]["edges"], 24);
    assert_eq!(manifest["schema_version"], 1);
    assert!(hasse.exists());
}

#[test]
fn data_dir_resolves_relative_inputs() {
    let dir = TempDir::new().unwrap();
    tabular_csv(dir.path());
    let out = dir.path().join("graph.json");
    let o = hnn_env(&["graph", "build", "--input", "data.csv", "--target", "y", "--out", s(&out)], "HNN_DATA_DIR", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let csv = tabular_csv(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "learning_rate = 0.01\nlerning_rate = 0.1\n").unwrap();
    let out = dir.path().join("run");
    let o = hnn(&["tabular", "train", "--input", s(&csv), "--target", "y", "--config", s(&cfg), "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lerning_rate"), "{}", stderr(&o));
}

#[test]
fn tabular_run_replays_and_reports() {
    let dir = TempDir::new().unwrap();
    let csv = tabular_csv(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hnn(&[
            "tabular", "train", "--input", s(&csv), "--target", "y", "--max-epochs", "20", "--seed", "3", "--out-dir", s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let (ma, mb) = (json(&a.join("manifest.json")), json(&b.join("manifest.json")));
    assert_eq!(ma["metrics"], mb["metrics"]);
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["dataset_hash"], mb["dataset_hash"]);
    assert_eq!(fs::read(a.join("checkpoint.json")).unwrap(), fs::read(b.join("checkpoint.json")).unwrap());

    let eval = dir.path().join("eval");
    let o = hnn(&[
        "tabular", "eval", "--input", s(&csv), "--target", "y", "--checkpoint", s(&a.join("checkpoint.json")), "--out-dir", s(&eval),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(eval.join("predictions.csv").exists());

    let report = dir.path().join("report.md");
    let o = hnn(&["report", "--manifests", s(&a.join("manifest.json")), s(&b.join("manifest.json")), "--out", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(&report).unwrap().contains("hnn"));
}

#[test]
fn forecasting_eval_reproduces_training_scores() {
    let dir = TempDir::new().unwrap();
    let csv = series_csv(dir.path());
    let out = dir.path().join("ts");
    let o = hnn(&["ts", "train", "--input", s(&csv), "--hidden", "4", "--lookback", "12", "--max-epochs", "3", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trained = json(&out.join("metrics.json"));

    let eval = dir.path().join("ts-eval");
    let o = hnn(&["ts", "eval", "--input", s(&csv), "--model", s(&out.join("forecaster.json")), "--out-dir", s(&eval)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let replay = json(&eval.join("manifest.json"));
    assert_eq!(replay["metrics"]["rse"], trained["rse"]);
    assert_eq!(replay["metrics"]["corr"], trained["corr"]);
}
