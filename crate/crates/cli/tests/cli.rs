use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_procfair");
const SMALL: [&str; 4] = ["--rows", "1200", "--advantaged", "700"];

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is the JSON report")
}

fn error(dir: &Path, args: &[&str], code: i32) -> Value {
    let out = run(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let line = String::from_utf8_lossy(&out.stderr);
    let last = line.lines().last().expect("an error line");
    serde_json::from_str::<Value>(last).expect("stderr ends with a JSON error")["error"].clone()
}

fn train_small(dir: &Path, name: &str, epochs: &str, extra: &[&str]) -> Value {
    let mut args = vec!["--out", "o", "train", "--name", name, "--epochs", epochs];
    args.extend(SMALL);
    args.extend(extra);
    ok(dir, &args)
}

#[test]
fn report_envelope_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--out", "o", "gen-data"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let at: Vec<usize> = ["version", "command", "config", "results", "timing"]
        .iter()
        .map(|k| text.find(&format!("\n  \"{k}\":")).unwrap_or_else(|| panic!("missing top-level {k}")))
        .collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "top-level keys out of order");
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["command"], "gen-data");
    assert!(report["timing"].is_null());
    assert_eq!(report["config"]["seed"], 0);
    assert_eq!(report["results"]["rows"], 10_000);
    let dp = report["results"]["dp"].as_f64().unwrap();
    assert!((dp - 0.2073).abs() < 1e-3);
    let on_disk: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/gen-data.json")).unwrap()).unwrap();
    assert_eq!(on_disk, report);
    assert!(dir.path().join("o/synthetic.csv").exists());
    assert!(dir.path().join("o/synthetic.schema.json").exists());

    let timed = ok(dir.path(), &["--out", "o", "--timing", "gen-data", "--rows", "100", "--advantaged", "50"]);
    assert!(timed["timing"]["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), r#"{"seed": 3, "data": {"split_ratio": 0.7}, "audit": {"n_pairs": 40}}"#)
        .unwrap();
    let from_file =
        ok(dir.path(), &["--config", "run.json", "--out", "a", "gen-data", "--rows", "200", "--advantaged", "100"]);
    assert_eq!(from_file["config"]["seed"], 3);
    assert_eq!(from_file["config"]["data"]["split_ratio"], 0.7);
    assert_eq!(from_file["config"]["audit"]["n_pairs"], 40);
    assert_eq!(from_file["config"]["audit"]["seed"], 3);
    let flagged = ok(
        dir.path(),
        &["--config", "run.json", "--seed", "5", "--out", "b", "gen-data", "--rows", "200", "--advantaged", "100"],
    );
    assert_eq!(flagged["config"]["seed"], 5);
    assert_eq!(flagged["config"]["data"]["source"]["synthetic"]["seed"], 5);

    fs::write(dir.path().join("bad.json"), r#"{"seeed": 3}"#).unwrap();
    let err = error(dir.path(), &["--config", "bad.json", "gen-data"], 1);
    assert_eq!(err["command"], "gen-data");
    assert_eq!(err["kind"], "json");
}

#[test]
fn train_variants() {
    let dir = tempfile::tempdir().unwrap();
    let fair = train_small(dir.path(), "fair", "60", &["--features", "x1,x2"]);
    assert_eq!(fair["results"]["features"], serde_json::json!(["x1", "x2"]));
    let by_corr = train_small(dir.path(), "corr", "60", &["--features", "fair"]);
    assert_eq!(by_corr["results"]["features"], serde_json::json!(["x1", "x2"]));

    let init = train_small(dir.path(), "init", "0", &["--kind", "logistic"]);
    assert!(init["results"]["final_loss"].is_null());
    let model: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/init.json")).unwrap()).unwrap();
    assert!(model["parameters"]["w"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
    assert_eq!(model["metadata"]["data"]["split_seed"], 0);

    let err = error(dir.path(), &["--out", "o", "train", "--features", "x9"], 1);
    assert_eq!(err["kind"], "unknown_column");
}

#[test]
fn audit_detect_mitigate_chain() {
    let dir = tempfile::tempdir().unwrap();
    train_small(dir.path(), "unfair", "60", &[]);
    let audit = ok(dir.path(), &["--out", "o", "audit", "--model", "o/unfair.json", "--permutations", "200"]);
    let report = &audit["results"]["report"];
    assert_eq!(report["pool_size"], 240);
    assert_eq!(audit["config"]["data"]["source"]["synthetic"]["m"], 1200, "model data is reused");
    for f in ["explanations_advantaged.csv", "explanations_disadvantaged.csv", "pairs.csv"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    let detect = ok(dir.path(), &["--out", "o", "detect", "--model", "o/unfair.json", "--permutations", "200"]);
    assert_eq!(detect["results"]["unfair"]["per_feature_pvalues"].as_array().unwrap().len(), 4);

    let sweep = ok(
        dir.path(),
        &[
            "--out",
            "o",
            "mitigate",
            "--model",
            "o/unfair.json",
            "--method",
            "modify",
            "--alphas",
            "0,15",
            "--tau",
            "20",
            "--permutations",
            "200",
        ],
    );
    if sweep["results"]["outcome"] != "nothing_to_mitigate" {
        let csv = fs::read_to_string(dir.path().join("o/alpha_sweep.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }
}

#[test]
fn usage_and_input_errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let err = error(dir.path(), &["audit", "--model", "missing.json"], 1);
    assert_eq!((err["command"].as_str(), err["kind"].as_str()), (Some("audit"), Some("io")));

    let err = error(dir.path(), &["audit", "--bogus"], 2);
    assert_eq!((err["command"].as_str(), err["kind"].as_str()), (Some("audit"), Some("usage")));

    fs::write(dir.path().join("blocker"), "").unwrap();
    let err = error(dir.path(), &["--out", "blocker/x", "gen-data"], 1);
    assert_eq!(err["kind"], "io");

    let err = error(dir.path(), &["--out", "o", "gen-data", "--rows", "10", "--advantaged", "10"], 1);
    assert_eq!(err["kind"], "config");

    assert!(run(dir.path(), &["--help"]).status.success());
    assert!(run(dir.path(), &["--version"]).status.success());
}

#[test]
fn sweep_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let mut args =
        vec!["--out", "o", "sweep-ws", "--seeds", "1", "--ws-points", "1", "--epochs", "30", "--permutations", "100"];
    args.extend(SMALL);
    let ws = ok(dir.path(), &args);
    assert_eq!(ws["results"]["rows"].as_array().unwrap().len(), 1);
    assert_eq!(ws["results"]["rows"][0]["w_s"], 0.0);
    assert_eq!(fs::read_to_string(dir.path().join("o/sweep_ws.csv")).unwrap().lines().count(), 2);

    let mut args = vec!["--out", "o", "sweep-pool", "--pool-sizes", "150,400", "--pairs", "100", "--epochs", "10"];
    args.extend(SMALL);
    let err = error(dir.path(), &args, 1);
    assert!(err["message"].as_str().unwrap().contains("twice the pair count"));

    let mut args = vec!["--out", "o", "sweep-pool", "--pool-sizes", "400,2000", "--pairs", "20", "--epochs", "10"];
    args.extend(SMALL);
    assert!(error(dir.path(), &args, 1)["message"].as_str().unwrap().contains("exceeds the dataset"));

    let mut args = vec!["--out", "o", "sweep-n", "--seeds", "1", "--pair-counts", "1000", "--epochs", "10"];
    args.extend(SMALL);
    assert_eq!(error(dir.path(), &args, 1)["kind"], "group_too_small");
}

#[test]
fn boundary_grid_has_requested_resolution() {
    let dir = tempfile::tempdir().unwrap();
    train_small(dir.path(), "unfair", "150", &[]);
    let out = run(
        dir.path(),
        &[
            "--out",
            "o",
            "--threads",
            "1",
            "boundary",
            "--model",
            "o/unfair.json",
            "--resolution",
            "7",
            "--tau",
            "20",
            "--permutations",
            "200",
        ],
    );
    if out.status.success() {
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["results"]["grid"]["total"], 49);
        let grid = fs::read_to_string(dir.path().join("o/boundary_grid.csv")).unwrap();
        assert_eq!(grid.lines().next().unwrap(), "pc1,pc2,original,modified,retrained");
        assert_eq!(grid.lines().count(), 50);
    } else {
        // a small model can come out clean, which leaves nothing to compare
        let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).lines().last().unwrap()).unwrap();
        assert!(err["error"]["message"].as_str().unwrap().contains("no unfair features"));
    }
}
