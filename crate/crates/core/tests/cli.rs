use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use calibrated_al::experiment::{read_cycles_csv, CYCLES_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calibrated-al"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const CONFIG: &str = r#"
seeds = [1, 2]
sampler = "margin"
output_dir = "ignored"

[dataset]
generator = "blobs"
n_per_class = 30
num_classes = 3

[model]
hidden = [8]

[trainer]
epochs = 3

[loop]
initial_budget = 6
budget_per_cycle = 6
cycles = 3
"#;

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_reports_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");
    let stdout = ok(&[
        "run",
        "--config",
        p(&cfg),
        "--out",
        p(&out),
        "--dump-samples",
        "--seed-override",
        "9,10",
    ]);
    assert!(stdout.contains("reports written"));

    let text = fs::read_to_string(out.join("cycles.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(CYCLES_HEADER));
    let reports = read_cycles_csv(out.join("cycles.csv")).unwrap();
    assert_eq!(reports.len(), 6);
    assert_eq!(
        reports.iter().map(|r| r.seed).collect::<Vec<_>>(),
        [9, 9, 9, 10, 10, 10]
    );
    assert_eq!(
        reports.iter().map(|r| r.labeled_count).take(3).collect::<Vec<_>>(),
        [6, 12, 18]
    );
    assert!(out.join("seed_10/samples_cycle_3.csv").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seeds"], serde_json::json!([9, 10]));
    assert_eq!(summary["config"]["dump_samples"], serde_json::json!(true));
}

#[test]
fn unknown_config_key_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, CONFIG.replace("epochs = 3", "epochs = 3\nlearning_rat = 0.1")).unwrap();
    let out = cli(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("learning_rat") && err.contains("bad.toml"), "{err}");
    assert!(!dir.path().join("cycles.csv").exists());
}

#[test]
fn over_budget_config_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    fs::write(&cfg, CONFIG.replace("cycles = 3", "cycles = 20")).unwrap();
    let out = cli(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn gen_data_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("moons.csv");
    ok(&[
        "gen-data",
        "--generator",
        "two_moons",
        "--n",
        "50",
        "--out",
        p(&data),
        "--seed-override",
        "4",
    ]);
    let first = fs::read_to_string(&data).unwrap();
    assert_eq!(first.lines().count(), 51);
    ok(&[
        "gen-data",
        "--generator",
        "two_moons",
        "--n",
        "50",
        "--out",
        p(&data),
        "--seed-override",
        "4",
    ]);
    assert_eq!(fs::read_to_string(&data).unwrap(), first);

    let imb = dir.path().join("imb.csv");
    ok(&[
        "gen-data",
        "--generator",
        "blobs",
        "--n-per-class",
        "100",
        "--num-classes",
        "4",
        "--minority",
        "1,3",
        "--ratio",
        "10",
        "--out",
        p(&imb),
    ]);
    assert_eq!(
        fs::read_to_string(&imb).unwrap().lines().count(),
        1 + 100 + 10 + 100 + 10
    );

    let probs = dir.path().join("p.csv");
    fs::write(
        &probs,
        "p0,p1,p2,p3\n0.1,0.1,0.7,0.1\n0.3,0.23,0.23,0.24\n0.5,0.45,0.05,0\n",
    )
    .unwrap();
    let scores = dir.path().join("s.csv");
    ok(&[
        "score",
        "--method",
        "rankedms",
        "--probs",
        p(&probs),
        "--out",
        p(&scores),
    ]);
    let text = fs::read_to_string(&scores).unwrap();
    let rows: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(text.lines().next(), Some("row,score"));
    assert!((rows[0] - 0.6).abs() < 1e-12 && (rows[1] - 0.065).abs() < 1e-12 && (rows[2] - 4.0 / 15.0).abs() < 1e-12);

    fs::write(&probs, "0.5,0.6\n").unwrap();
    let out = cli(&[
        "score",
        "--method",
        "entropy",
        "--probs",
        p(&probs),
        "--out",
        p(&scores),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert!(
        !cli(&["score", "--method", "random", "--probs", p(&probs), "--out", p(&scores)])
            .status
            .success()
    );
}
