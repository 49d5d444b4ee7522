use std::fs;
use std::path::PathBuf;
use std::process::Command;

use opfold_cli::{emit_tables, run, Format, RunConfig, Status};
use opfold_core::bispec::{reference_operator, RightDifferentialOperator};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opfold-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn opfold() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opfold"))
}

fn write_config(dir: &PathBuf, text: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_paper_passes_and_round_trips_operator() {
    let out = scratch("paper");
    let status = opfold().args(["verify-paper", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "PASS");
    assert_eq!(report["entries"]["darboux.product-display"]["status"], "REPORT");
    assert_eq!(report["entries"]["min-order"]["status"], "PASS");
    assert!(report.get("timings").is_none());
    let op: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("operator.json")).unwrap()).unwrap();
    assert_eq!(
        RightDifferentialOperator::from_json(&op).unwrap(),
        reference_operator().0
    );
    fs::remove_dir_all(out).unwrap();
}

#[test]
fn identical_configs_give_identical_bytes() {
    let mut config = RunConfig::paper();
    config.n_max = 8;
    config.tasks = vec!["darboux".into(), "ttrr".into()];
    let resolved = config.resolve().unwrap();
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        emit_tables(&run(&resolved, false), Format::Csv, dir).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "zeta.csv"));
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let zeta = fs::read_to_string(a.join("zeta.csv")).unwrap();
    assert!(zeta.lines().any(|l| l == "1,0 2 -3 9"));
    fs::remove_dir_all(a).unwrap();
    fs::remove_dir_all(b).unwrap();
}

#[test]
fn non_symmetric_mass_is_rejected_before_running() {
    let dir = scratch("asym");
    let path = write_config(
        &dir,
        r#"{"measure": {"type": "laguerre", "alpha": 0}, "c": "0", "N": 1,
            "M": [["0", "1"], ["0", "1"]], "n_max": 6, "tasks": ["all"]}"#,
    );
    let out = opfold()
        .args(["run", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not symmetric"));
    assert!(!dir.join("out").exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn moments_csv_for_alpha_two() {
    let dir = scratch("moments");
    let path = write_config(
        &dir,
        r#"{"measure": {"type": "laguerre", "alpha": 2}, "c": "0", "N": 1,
            "M": [["0", "0"], ["0", "1"]], "n_max": 4, "tasks": ["moments"]}"#,
    );
    let status = opfold()
        .args(["run", "--format", "csv", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.join("out/moments.csv")).unwrap();
    let mut fact = 2u64;
    for (k, line) in csv.lines().skip(1).enumerate() {
        assert_eq!(line, format!("{k},{fact}"));
        fact *= k as u64 + 3;
    }
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn failing_check_sets_exit_code() {
    let mut config = RunConfig::paper();
    config.n_max = 6;
    config.tasks = vec!["connection".into()];
    config.float_tolerance = "1e-300".into();
    let bundle = run(&config.resolve().unwrap(), false);
    assert_eq!(bundle.report.status, Status::Fail);
    assert_eq!(bundle.report.entries["connection"].status, Status::Fail);

    let dir = scratch("fail");
    let path = write_config(&dir, &serde_json::to_string(&config).unwrap());
    let status = opfold()
        .args(["run", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn hermite_configuration() {
    let config: RunConfig = serde_json::from_str(
        r#"{"measure": {"type": "hermite"}, "c": "0", "N": 1, "M": [["0", "0"], ["0", "0"]],
            "n_max": 8, "tasks": ["min-order", "conjugation"]}"#,
    )
    .unwrap();
    let report = run(&config.resolve().unwrap(), false).report;
    assert_eq!(report.status, Status::Pass);
    assert_eq!(report.entries["min-order"].status, Status::Pass);
    assert_eq!(report.entries["conjugation"].status, Status::Pass);
}
