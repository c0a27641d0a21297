//! End-to-end CLI behavior: exit codes, artifact layout, bit-for-bit
//! reproducibility, and manifest-driven reruns.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zeitlin-lab"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"))
}

#[test]
fn verify_battery_passes_at_n_16() {
    let out = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["verify", "--n", "16", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("checks passed") && !stdout.contains("FAIL"),
        "{stdout}"
    );
}

#[test]
fn bracket_sweep_reproduces_bit_for_bit() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let status = bin()
            .args(["bracket-sweep", "--n-list", "8,16,32", "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let rows_a = read(&a.path().join("bracket-sweep/rows.csv"));
    let rows_b = read(&b.path().join("bracket-sweep/rows.csv"));
    assert_eq!(rows_a, rows_b);

    // rerunning from the manifest reproduces the rows too
    let c = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["bracket-sweep", "--config"])
        .arg(a.path().join("bracket-sweep/manifest.json"))
        .arg("--out")
        .arg(c.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(rows_a, read(&c.path().join("bracket-sweep/rows.csv")));
}

#[test]
fn jacobi_sweep_rejects_non_stationary_base_flow_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let omega = dir.path().join("omega.json");
    std::fs::write(
        &omega,
        r#"{"L_max": 3, "coeffs": [[2, 0, 1.0, 0.0], [3, 1, 0.4, 0.0], [3, -1, -0.4, 0.0]]}"#,
    )
    .unwrap();
    let output = bin()
        .args(["jacobi-sweep", "--n-list", "8,16,32", "--omega"])
        .arg(&omega)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("not stationary") && stderr.contains("residual"),
        "{stderr}"
    );
}

#[test]
fn jacobi_sweep_with_zero_base_flow_has_identically_zero_errors() {
    // both systems are nilpotent and exactly matched below the cutoff
    let dir = tempfile::tempdir().unwrap();
    let omega = dir.path().join("omega.json");
    std::fs::write(&omega, r#"{"L_max": 1, "coeffs": []}"#).unwrap();
    let status = bin()
        .args([
            "jacobi-sweep",
            "--n-list",
            "8,16,32",
            "--t-grid",
            "0.5,1",
            "--omega",
        ])
        .arg(&omega)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("jacobi-sweep/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["all_zero"], serde_json::Value::Bool(true));
}

#[test]
fn threshold_failure_exits_1() {
    // an impossible slope demand turns a healthy sweep into a threshold failure
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "structure-sweep",
            "--n-list",
            "8,16,32",
            "--triples",
            "3",
            "--slope-threshold",
            "5.0",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // artifacts are still written for inspection
    assert!(dir.path().join("structure-sweep/summary.json").exists());
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"n_list": [32, 16]}"#).unwrap(); // not increasing
    let status = bin()
        .args(["bracket-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let cfg = dir.path().join("unknown.json");
    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let status = bin()
        .args(["bracket-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn curvature_sweep_with_equal_inputs_passes_with_zero_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(
        &f,
        r#"{"L_max": 2, "coeffs": [[2, 0, 0.5, 0.0], [2, 1, 0.3, 0.1], [2, -1, -0.3, 0.1]]}"#,
    )
    .unwrap();
    let status = bin()
        .args(["curvature-sweep", "--n-list", "8,16,32", "--f"])
        .arg(&f)
        .arg("--g")
        .arg(&f)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(
        status.success(),
        "equal inputs should pass with all-zero error rows"
    );
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("curvature-sweep/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        summary["pairs"][0]["all_zero"],
        serde_json::Value::Bool(true)
    );
}

#[test]
fn simulate_writes_checkpoints_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "simulate",
            "--n",
            "12",
            "--t-final",
            "0.5",
            "--dt",
            "0.01",
            "--preset",
            "zonal-l2",
            "--checkpoint-every",
            "25",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let sim = dir.path().join("simulate");
    assert!(sim.join("diagnostics.csv").exists());
    assert!(sim.join("checkpoint_000025.mat").exists());
    assert!(sim.join("checkpoint_000025.json").exists());
    assert!(sim.join("manifest.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sim.join("summary.json")).unwrap()).unwrap();
    assert!(summary["eigenvalue_drift"].as_f64().unwrap() < 1e-10);
}
