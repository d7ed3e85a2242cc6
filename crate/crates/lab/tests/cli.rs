use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blowuplab::goldens;

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn shipped_goldens() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("goldens.txt")
}

fn lab(out: &Path, goldens: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .arg("--out")
        .arg(out)
        .arg("--goldens")
        .arg(goldens)
        .args(args)
        .env_remove("BLOWUPLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn shipped_goldens_match_the_reference() {
    let g = goldens::load(&shipped_goldens()).unwrap();
    let fresh = goldens::Goldens::from(&blowuplab_core::groundstate::oracle::reference_values());
    assert_eq!(g, fresh);
}

#[test]
fn regen_goldens_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g/goldens.txt");
    let o = lab(dir.path(), &path, &["regen-goldens"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(goldens::load(&path).unwrap(), goldens::load(&shipped_goldens()).unwrap());
}

#[test]
fn verify_ode_reports_the_degenerate_case_as_expected_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &shipped_goldens(), &["verify", "--suite", "ode"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let line = out.lines().find(|l| l.starts_with("ode.k1_zero.uniformity")).unwrap();
    assert!(line.ends_with("XFAIL"), "{line}");
    assert!(out.lines().filter(|l| l.starts_with("ode.k1_positive")).all(|l| l.ends_with("PASS")));
    assert!(dir.path().join("verify_ode.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(manifest.lines().last().unwrap()).unwrap();
    assert_eq!(v["status"], "pass");
    assert_eq!(v["command"], "verify ode");
}

#[test]
fn verify_spectral_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &shipped_goldens(), &["verify", "--suite", "spectral"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", text(&o.stdout), text(&o.stderr));
    assert_eq!(text(&o.stdout).lines().filter(|l| l.starts_with("spectral.")).count(), 10);
}

#[test]
fn corrupted_golden_fails_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text_in = std::fs::read_to_string(shipped_goldens()).unwrap();
    let corrupted = text_in
        .lines()
        .map(|l| if l.starts_with("mass=") { "mass=11.71".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.path().join("goldens.txt");
    std::fs::write(&path, corrupted).unwrap();
    let o = lab(dir.path(), &path, &["verify", "--suite", "all"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("golden mismatch at key mass"), "{}", text(&o.stderr));
    // The expensive suites are skipped once the goldens disagree.
    assert!(!text(&o.stdout).contains("spectral."));
}

#[test]
fn malformed_golden_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("goldens.txt");
    let t = std::fs::read_to_string(shipped_goldens()).unwrap().replace("variance=", "variance=x");
    std::fs::write(&path, t).unwrap();
    let o = lab(dir.path(), &path, &["verify", "--suite", "ode"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(text(&o.stderr).contains("variance"), "{}", text(&o.stderr));
}

#[test]
fn missing_goldens_point_at_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &dir.path().join("none.txt"), &["verify", "--suite", "ode"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("regen-goldens"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &shipped_goldens(), &["verify", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"grid": {"L": 1.0, "m": 100}, "k": {"family": "quadratic_gaussian", "k1": -1, "k2": 1},
            "time": {"t0": -0.1, "t_end": 0.0}, "direction": "forward",
            "decompose": {"stride": 10, "tol": 1e-10}, "output": {"csv_path": "x.csv"}}"#,
    )
    .unwrap();
    let o = lab(dir.path(), &shipped_goldens(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    for needle in ["grid:", "k:", "time.dt: missing"] {
        assert!(err.contains(needle), "{needle} not in {err}");
    }
}

#[test]
fn backward_run_writes_artifacts_deterministically() {
    let cfg = repo_file("configs/backward.json");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = lab(d.path(), &shipped_goldens(), &["run", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}{}", text(&o.stdout), text(&o.stderr));
    }
    let csv_a = std::fs::read(a.path().join("backward/trajectory.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("backward/trajectory.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let csv = text(&csv_a);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    for col in ["t", "lambda", "eps_l2", "eps_h1", "mass", "energy", "I1", "bootstrap"] {
        assert!(header.contains(&col), "{col}");
    }
    let li = header.iter().position(|c| *c == "lambda").unwrap();
    let lambdas: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(li).unwrap().parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
    assert!(a.path().join("backward/trajectory.svg").exists());
    let manifest = std::fs::read_to_string(a.path().join("manifest.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(manifest.lines().last().unwrap()).unwrap();
    assert_eq!(v["status"], "pass");
    for p in v["outputs"].as_array().unwrap() {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
}

#[test]
fn sweep_rejects_short_and_empty_value_lists() {
    let dir = tempfile::tempdir().unwrap();
    for values in ["", "0.1,0.05"] {
        let o = lab(dir.path(), &shipped_goldens(), &["sweep", "--axis", "P_scale", "--values", values]);
        assert_eq!(o.status.code(), Some(2), "{values:?}");
        assert!(text(&o.stderr).contains("usage error"));
    }
    let o = lab(dir.path(), &shipped_goldens(), &["sweep", "--axis", "t0", "--values", "-1,-2,-3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn p_scale_sweep_recovers_the_quartic_mass_law() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &shipped_goldens(), &["sweep", "--axis", "P_scale", "--values", "0.1,0.05,0.025,0.0125"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let slopes = std::fs::read_to_string(dir.path().join("sweep_P_scale_slopes.csv")).unwrap();
    let mass: f64 = slopes
        .lines()
        .find(|l| l.starts_with("mass_defect,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(mass >= 3.7, "{mass}");
    let rows = std::fs::read_to_string(dir.path().join("sweep_P_scale.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);
}

#[test]
fn failing_sub_run_gives_partial_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/backward.json");
    let o = Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .args(["--out", dir.path().to_str().unwrap(), "sweep", "--config", cfg.to_str().unwrap()])
        .args(["--axis", "t0", "--values=-0.5,0.4,-0.45"])
        .env("BLOWUPLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("sweep_t0.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains("error"));
    assert!(!rows[0].contains("error") && !rows[2].contains("error"));
    assert!(dir.path().join("t0_00/trajectory.csv").exists());
    assert!(dir.path().join("t0_02/trajectory.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    assert!(manifest.contains("\"partial\""));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .args(["--out", dir.path().to_str().unwrap(), "sweep", "--axis", "P_scale"])
        .args(["--values", "0.1,0.05,0.025"])
        .env("BLOWUPLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
