use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stretchdiss::experiments::{verify_theorem, Status, SweepReport};
use stretchdiss::solver::read_snapshot;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stretchdiss"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn expected_code(s: Status) -> i32 {
    match s {
        Status::Pass => 0,
        Status::Fail => 3,
        Status::Indeterminate => 4,
    }
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn profiles_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let o = run(&["profiles", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = json(&out.join("manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    let report = json(&out.join("profiles_report.json"));
    assert_eq!(report["config_hash"], hash);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
    assert_eq!(json(&out.join("profiles.json"))["config_hash"], hash);
}

#[test]
fn sweep_minimal_config_writes_stamped_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("w");
    let cfg = write_config(
        tmp.path(),
        &format!(
            "alpha = 0.5\nn = [3, 4, 5]\n[output]\ndir = \"{}\"\n",
            out.display()
        ),
    );
    let o = run(&["sweep", "--config", &cfg]);

    let report = SweepReport::read(&out.join("report.json")).unwrap();
    assert_eq!(report.n_list, vec![3, 4, 5]);
    assert_eq!(
        code(&o),
        expected_code(report.verdict.status),
        "{}",
        stderr(&o)
    );

    let manifest = json(&out.join("manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap().to_string();
    assert_eq!(manifest["config"]["profiles"]["i_max"], 8192);
    assert_eq!(manifest["config"]["case"]["coupling"], 1.0);
    assert_eq!(json(&out.join("report.json"))["config_hash"], hash.as_str());
    for n in [3, 4, 5] {
        for suffix in [".csv", "_difference.csv"] {
            let text = fs::read_to_string(out.join(format!("case_{n}_0.5{suffix}"))).unwrap();
            assert_eq!(text.lines().next().unwrap(), format!("# config {hash}"));
        }
        assert_eq!(
            json(&out.join(format!("case_{n}_0.5.json")))["config_hash"],
            hash.as_str()
        );
    }
    let plot = fs::read_to_string(out.join("plotdata.dat")).unwrap();
    assert!(plot.starts_with(&format!("# config {hash}")));
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 3);
    for f in manifest["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).is_file(), "{f}");
    }
}

#[test]
fn sweep_is_bit_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for (d, workers) in dirs.iter().zip(["1", "3"]) {
        let o = run(&[
            "sweep",
            "--n-list",
            "3,4,5",
            "--workers",
            workers,
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    }
    for f in [
        "report.json",
        "plotdata.dat",
        "case_4_0.5.csv",
        "case_5_0.5_difference.csv",
        "case_3_0.5.json",
    ] {
        let a = fs::read(dirs[0].join(f)).unwrap();
        let b = fs::read(dirs[1].join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn alpha_out_of_range_is_a_config_error() {
    let o = run(&["sweep", "--alpha", "0.8"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("alpha must lie in (0, 3/4)"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn config_errors_are_aggregated() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[case]\nalpha = 0.9\ncolour = 1\n[sweep]\nn = [3, 4.5, 5]\n",
    );
    let o = run(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("case.colour: unknown key"), "{err}");
    assert!(err.contains("alpha must lie in (0, 3/4)"), "{err}");
    assert!(err.contains("n must be an integer"), "{err}");
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn policy_violating_dt_is_a_recorded_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = run(&[
        "simulate",
        "--n",
        "3",
        "--override",
        "case.dt=0.01",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    let manifest = json(&out.join("manifest.json"));
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(
        warnings.iter().any(|w| w.as_str().unwrap().contains("dt")),
        "{warnings:?}"
    );
    assert_eq!(manifest["config"]["case"]["dt"], 0.01);
}

#[test]
fn simulate_snapshot_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = run(&["simulate", "--n", "3", "--out", out.to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 3), "{}", stderr(&o));
    let hash = json(&out.join("manifest.json"))["config_hash"]
        .as_str()
        .unwrap()
        .to_string();
    let file = fs::File::open(out.join("snapshot_3_0.5.txt")).unwrap();
    let (snap, stamp) = read_snapshot::<f64, _>(std::io::BufReader::new(file)).unwrap();
    assert_eq!(stamp, hash);
    assert_eq!(snap.values.len(), 2048);
    let side = json(&out.join("case_3_0.5.json"));
    assert!((snap.t - side["t_star"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn verify_flags_the_advection_ablation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("abl");
    let o = run(&[
        "sweep",
        "--n-list",
        "3,4,5",
        "--override",
        "case.coupling=0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(code(&o), 0);
    let manifest_before = fs::read(out.join("manifest.json")).unwrap();

    let o = run(&["verify", "--out", out.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    let report = SweepReport::read(&out.join("report.json")).unwrap();
    let verdict = verify_theorem(&report);
    assert_eq!(code(&o), expected_code(verdict.status));
    let heat = verdict.criteria.iter().find(|c| c.id == "ii").unwrap();
    assert!(!heat.passed);
    assert_eq!(
        fs::read(out.join("manifest.json")).unwrap(),
        manifest_before
    );
    assert!(out.join("verify_manifest.json").is_file());
}

#[test]
fn verify_without_report_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "--report",
        tmp.path().join("none.json").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn ansatz_check_reports_consistently() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let o = run(&["ansatz-check", "--n", "3", "--out", out.to_str().unwrap()]);
    let rep = json(&out.join("ansatz_check.json"));
    let passed = rep["error_passed"] == true && rep["order_passed"] == true;
    assert_eq!(code(&o), if passed { 0 } else { 3 }, "{}", stderr(&o));
    assert_eq!(rep["runs"].as_array().unwrap().len(), 3);
}
