use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_model-space"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scenario_list_shows_every_scenario() {
    let o = run(&["scenario", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "clark-identity",
        "lattice-gram",
        "kadets-sweep",
        "aob-decay",
        "theorem4-crosscheck",
        "theorem5-crosscheck",
        "hilbert-pairs",
        "verify-lemmas",
    ] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn scenario_list_filter_and_json() {
    let o = run(&["scenario", "list", "--filter", "theorem5", "--json"]);
    assert!(o.status.success());
    let docs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let docs = docs.as_array().unwrap();
    assert_eq!(docs.len(), 1);
    assert_eq!(docs[0]["name"], "theorem5-crosscheck");
    assert_eq!(docs[0]["defaults"]["scenario"], "theorem5-crosscheck");
}

#[test]
fn lattice_gram_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["scenario", "run", "lattice-gram", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let base = dir.path().join("lattice-gram");
    assert!(base.join("report.json").exists());
    assert!(base.join("config.toml").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(base.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "lattice-gram");
    assert!(report["version"].is_string());
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let o = run(&["scenario", "run", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failing_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("strict.toml");
    fs::write(
        &config,
        "scenario = \"lattice-gram\"\n[thresholds]\nlattice_offdiag = 1e-300\n",
    )
    .unwrap();
    let o = run(&[
        "scenario",
        "run",
        "lattice-gram",
        "--config",
        path(&config),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn mismatched_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("other.toml");
    fs::write(&config, "scenario = \"hilbert-pairs\"\n").unwrap();
    let o = run(&["scenario", "run", "lattice-gram", "--config", path(&config)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&[
            "scenario",
            "run",
            "kadets-sweep",
            "--seed",
            "7",
            "--out",
            path(dir.path()),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let mut files: Vec<_> = fs::read_dir(a.path().join("kadets-sweep"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    assert!(files.len() >= 3);
    for f in files {
        let x = fs::read(a.path().join("kadets-sweep").join(&f)).unwrap();
        let y = fs::read(b.path().join("kadets-sweep").join(&f)).unwrap();
        assert_eq!(x, y, "{f:?} differs");
    }
}

#[test]
fn gram_with_negative_window() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "gram",
        "--sequence",
        "perturbed:0.1:alternating",
        "--window",
        "-3..3",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("gram.csv")).unwrap();
    assert_eq!(
        csv.lines()
            .filter(|l| l.starts_with(char::is_numeric) || l.starts_with('-'))
            .count(),
        49
    );
    let meta = fs::read_to_string(dir.path().join("gram.toml")).unwrap();
    assert!(meta.contains("-3"));
}

#[test]
fn validate_reads_an_explicit_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "exp_type = 1.5\nzeros = [[0.0, 1.0], [2.0, 0.5]]\n").unwrap();
    let o = run(&["validate", path(&spec), "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("zeros = 2"));
    assert!(dir.path().join("validate.toml").exists());
}

#[test]
fn validate_rejects_a_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "exp_type = -1.0\nzeros = []\n").unwrap();
    let o = run(&["validate", path(&spec)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_window_is_rejected() {
    let o = run(&["gram", "--window", "5..1"]);
    assert_eq!(o.status.code(), Some(1));
}
