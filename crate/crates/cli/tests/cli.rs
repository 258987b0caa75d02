use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ermstab_cli::ReportDocument;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ermstab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn analyze(cfg: &str, dir: &Path, workers: &str) -> (i32, ReportDocument) {
    let path = dir.join(format!("{cfg}.{workers}.json"));
    let out = run(bin()
        .env("ERMSTAB_WORKERS", workers)
        .args(["analyze", "--config"])
        .arg(config(cfg))
        .arg("--out")
        .arg(&path));
    (code(&out), ReportDocument::read(&path).unwrap())
}

#[test]
fn constant_family_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let (c, report) = analyze("constant.json", dir.path(), "1");
    assert_eq!(c, 0);
    assert_eq!(report.results["stability"]["verdict"], "CONSISTENT");
    assert_eq!(report.exit_code, 0);
}

#[test]
fn blowup_family_has_no_convergent_selection() {
    let dir = tempfile::tempdir().unwrap();
    let (c, report) = analyze("blowup.json", dir.path(), "2");
    assert_eq!(c, 4);
    assert_eq!(report.results["stability"]["verdict"], "NO_CONVERGENT_SELECTION");
    assert_eq!(report.results["boundedness"]["verdict"]["verdict"], "escaping");
}

#[test]
fn boxed_blowup_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let (c, _) = analyze("boxed_blowup.json", dir.path(), "1");
    assert_eq!(c, 0);
}

#[test]
fn invalid_configs_exit_with_usage_code() {
    let out = run(bin().args(["analyze", "--config"]).arg(config("bad_radius.json")));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\n  \"schema_version\": 1,\n  \"radius\": ,\n}").unwrap();
    let out = run(bin().args(["analyze", "--config"]).arg(&broken));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = run(bin().args(["reproduce", "prop-9-9"]));
    assert_eq!(code(&out), 2);
}

#[test]
fn wrong_claimed_limit_is_inconsistent() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("constant.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut claimed = doc["problem"].clone();
    claimed["linear"] = serde_json::json!([0.0, 0.0]);
    claimed["offset"] = serde_json::json!(0.0);
    doc["claimed_limit"] = claimed;
    let path = dir.path().join("claimed.json");
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let report_path = dir.path().join("claimed.report.json");
    let out = run(bin()
        .args(["analyze", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&report_path));
    assert_eq!(code(&out), 3);
    let report = ReportDocument::read(&report_path).unwrap();
    let witness = &report.results["stability"]["witness"];
    assert_eq!(witness["limit"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn reports_are_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = analyze("additive.json", dir.path(), "1");
    let (_, b) = analyze("additive.json", dir.path(), "3");
    assert_eq!(a.comparable().to_text(), b.comparable().to_text());
    assert!(!a.series.is_empty());
}

#[test]
fn seed_override_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(bin()
        .args(["analyze", "--seed", "99", "--config"])
        .arg(config("constant.json"))
        .arg("--out")
        .arg(&path));
    assert_eq!(code(&out), 0);
    let report = ReportDocument::read(&path).unwrap();
    assert_eq!(report.config.unwrap()["seed"], 99);
}

#[test]
fn reproductions_pass() {
    for id in ["prop-3-1", "prop-3-2", "thm-5-1-demo", "prop-6-2", "cor-4-2"] {
        let out = run(bin().args(["reproduce", id]));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(code(&out), 0, "{id}: {stdout}");
        assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
    }
}

#[test]
fn demo_report_exports_dist_and_bound_columns() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("demo.json");
    assert_eq!(
        code(&run(bin()
            .args(["reproduce", "thm-5-1-demo", "--out"])
            .arg(&report))),
        0
    );
    let out_dir = dir.path().join("cols");
    let out = run(bin()
        .arg("export")
        .arg(&report)
        .args(["--format", "columnar", "--out-dir"])
        .arg(&out_dir));
    assert_eq!(code(&out), 0);
    let dist = fs::read_to_string(out_dir.join("dist.csv")).unwrap();
    let bound = fs::read_to_string(out_dir.join("bound.csv")).unwrap();
    assert!(dist.starts_with("n,dist\n1,1.0000000000"), "{dist}");
    assert!(bound.starts_with("n,bound\n1,1.10453"), "{bound}");

    // byte-stable
    let again = dir.path().join("cols2");
    run(bin()
        .arg("export")
        .arg(&report)
        .args(["--format", "columnar", "--out-dir"])
        .arg(&again));
    assert_eq!(fs::read(again.join("dist.csv")).unwrap(), dist.as_bytes());

    let structured = dir.path().join("full");
    let out = run(bin()
        .arg("export")
        .arg(&report)
        .args(["--format", "structured", "--out-dir"])
        .arg(&structured));
    assert_eq!(code(&out), 0);
    let doc = ReportDocument::read(&structured.join("report.json")).unwrap();
    assert_eq!(doc, ReportDocument::read(&report).unwrap());
}

#[test]
fn export_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "{}").unwrap();
    let out_dir = dir.path().join("none");
    let out = run(bin().arg("export").arg(&empty).arg("--out-dir").arg(&out_dir));
    assert_eq!(code(&out), 0);
    assert!(!out_dir.exists());

    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{\"series\": [1, 2").unwrap();
    let out = run(bin().arg("export").arg(&corrupt));
    assert_eq!(code(&out), 1);

    let out = run(bin().arg("export").arg(dir.path().join("missing.json")));
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_qg_suite_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("qg.json");
    let out = run(bin()
        .args(["verify", "qg", "--trials", "40", "--config"])
        .arg(config("additive.json"))
        .arg("--out")
        .arg(&path));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = ReportDocument::read(&path).unwrap();
    assert_eq!(report.series["worst_ratio"].len(), 40);
    assert!(report.series["worst_ratio"].values.iter().all(|&r| r <= 1.0));
}

#[test]
fn bad_worker_count_is_a_usage_error() {
    let out = run(bin()
        .env("ERMSTAB_WORKERS", "zero")
        .args(["reproduce", "prop-3-1"]));
    assert_eq!(code(&out), 2);
}
