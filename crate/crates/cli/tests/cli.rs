use std::fs;
use std::process::Command;

use kostin_core::trajectory::TrajectorySeries;

fn kostin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kostin"))
}

const MINIMAL: &str = r#"
id = "minimal"

[system]
mass = 1.0
hbar = 1.0
nu = 0.0

[potential]
kind = "free"

[initial]
x0 = 0.0
v0 = 0.0
a0 = 1.0

[time]
t_final = 0.1
dt_ode = 0.01

[grid]
x_min = -10.0
dx = 0.1
n = 200

[pipelines]
trajectory = true
validate = false
"#;

#[test]
fn list_names_bundled_scenarios() {
    let out = kostin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert!(names.contains(&"free_spreading"));
    assert!(names.contains(&"kernel_free"));
}

#[test]
fn minimal_config_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("minimal.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let out_dir = dir.path().join("out");
    let status =
        kostin().args(["run", cfg.to_str().unwrap(), "--quiet", "--out", out_dir.to_str().unwrap()]).status().unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TrajectorySeries::CSV_HEADER));
    assert_eq!(lines.count(), 11);
    assert!(!out_dir.join("report.csv").exists());
    assert!(out_dir.join("metadata.toml").exists());
}

#[test]
fn config_dir_is_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("minimal.toml");
    fs::write(&cfg, format!("{MINIMAL}\n[output]\ndir = \"results\"\n")).unwrap();
    let status = kostin().args(["run", cfg.to_str().unwrap(), "--quiet"]).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("results/trajectory.csv").exists());
}

#[test]
fn unknown_key_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, MINIMAL.replace("nu = 0.0", "nuu = 0.0")).unwrap();
    let out = kostin().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nuu"), "{err}");
    assert!(err.contains("line 7"), "{err}");
}

#[test]
fn missing_config_fails() {
    let out = kostin().args(["run", "/nonexistent/scenario.toml", "--quiet"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_validation_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    let src = MINIMAL.replace("validate = false", "validate = true") + "\n[tolerances]\nresidual = -1.0\n";
    fs::write(&cfg, src).unwrap();
    let out_dir = dir.path().join("out");
    let status =
        kostin().args(["run", cfg.to_str().unwrap(), "--quiet", "--out", out_dir.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.contains("max_coefficient_residual"));
    assert!(report.contains(",false,"));
}

#[test]
fn harmonic_damped_passes_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        kostin().args(["run", "harmonic_damped", "--quiet", "--out", dir.path().to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let metrics: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    for m in [
        "max_coefficient_residual",
        "analytic_norm_deviation",
        "continuity_residual",
        "ansatz_pde_distance",
        "pde_norm_drift_per_1000_steps",
        "kernel_reconstruction_distance",
    ] {
        assert!(metrics.contains(&m), "{m}");
    }
    for name in ["trajectory.csv", "kernel.csv", "propagated.csv", "packet_0000.csv", "pde_0008.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let status = kostin()
            .args(["run", "kernel_free", "--quiet", "--out", dir.path().join(sub).to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("a");
    run("b");
    for name in ["trajectory.csv", "kernel.csv", "propagated.csv", "report.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name}");
    }
}
