//! End-to-end runs of the `steklov` binary against real configs.

use std::path::Path;
use std::process::{Command, Output};

fn steklov(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_steklov"));
    cmd.args(args);
    cmd.env_remove("STEKLOV_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const CYLINDER_SPECTRUM: &str = r#"{
    "command": "spectrum",
    "base": {"kind": "interval", "length": 1.0},
    "fiber": {"kind": "sphere", "dim": 2},
    "warping": {"kind": "constant", "value": 1.0},
    "count": 6,
    "mesh_n": 2048
}"#;

#[test]
fn spectrum_run_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(&cfg, CYLINDER_SPECTRUM);
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,sigma,j,l,lambda_j,multiplicity");
    let row0 = lines.next().unwrap();
    assert!(row0.starts_with("0,0.00000000000e0,0,0,"), "{row0}");
    // sigma_1 = sqrt(2) tanh(sqrt(2)/2) = 0.861057...
    let row1 = lines.next().unwrap();
    assert!(row1.starts_with("1,8.6105"), "{row1}");
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let cfg = dir.path().join("run.json");
        write(&cfg, CYLINDER_SPECTRUM);
        let out = steklov(
            &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--quiet"],
            &[],
        );
        assert!(out.status.success());
        assert!(out.stdout.is_empty(), "quiet run prints nothing");
    }
    let a = std::fs::read(dir_a.path().join("spectrum.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("spectrum.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bounds_run_emits_json_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "bounds",
            "base": {"kind": "interval", "length": 1.0},
            "fiber": {"kind": "sphere", "dim": 3},
            "warping": {"kind": "samples", "grid": [0.0, 0.4, 1.0], "values": [1.0, 2.0, 1.0]},
            "k": 1,
            "p": 2.0,
            "c": 2.0,
            "mesh_n": 512
        }"#,
    );
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds.json")).unwrap())
            .unwrap();
    let reports = json.as_array().unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"basic"));
    assert!(names.contains(&"kcompk0"));
    assert!(names.contains(&"const_chain_lower"));
    assert!(names.contains(&"lp"));
    assert!(names.contains(&"interval_k"));
    for r in reports {
        for key in ["name", "k", "lhs", "rhs", "margin", "verdict", "tol"] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
        if r["observational"].as_bool() != Some(true) {
            assert_eq!(r["verdict"], "pass", "{r}");
        }
    }
}

#[test]
fn validation_errors_are_field_addressed_and_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "blowup",
            "base": {"kind": "ball", "dim": 2, "radius": 1.0},
            "fiber": {"kind": "sphere", "dim": 4},
            "p": 0.5,
            "budget": 16.0,
            "eps_list": [0.0625]
        }"#,
    );
    let out = steklov(&["--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p:"), "{err}");
    assert!(std::fs::read_dir(dir.path()).unwrap().count() == 1, "no outputs written");
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "spectrum",
            "base": {"kind": "interval", "length": 1.0},
            "fiber": {"kind": "sphere", "dim": 2},
            "warping": {"kind": "constant", "value": 1.0},
            "mesh": 512
        }"#,
    );
    let out = steklov(&["--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn out_dir_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("artifacts");
    let cfg = dir.path().join("run.json");
    write(&cfg, CYLINDER_SPECTRUM);
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--quiet"],
        &[("STEKLOV_OUT_DIR", outdir.to_str().unwrap())],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(outdir.join("spectrum.csv").exists());
}

#[test]
fn conformal_command_passes_on_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "conformal",
            "base": {"kind": "interval", "length": 1.0},
            "warping": {"kind": "samples", "grid": [0.0, 0.2, 0.8, 1.0], "values": [1.0, 2.0, 2.0, 1.0]},
            "count": 4,
            "mesh_n": 2048
        }"#,
    );
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("k,sigma_warped,sigma_straight,rel_diff\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn saturate_and_stability_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sat.json");
    write(
        &cfg,
        r#"{
            "command": "saturate",
            "base": {"kind": "interval", "length": 1.0},
            "fiber": {"kind": "sphere", "dim": 2},
            "k": 1,
            "c_list": [8.0],
            "delta_list": [0.3, 0.1],
            "mesh_n": 1024
        }"#,
    );
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--workers", "2"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("c,delta,sigma_k,cn_sigma_mc,ceiling,ratio_to_ceiling\n"));

    let cfg2 = dir.path().join("stab.json");
    write(
        &cfg2,
        r#"{
            "command": "stability",
            "base": {"kind": "interval", "length": 1.0},
            "fiber": {"kind": "sphere", "dim": 2},
            "k": 1,
            "c": 8.0,
            "delta_list": [0.3, 0.1],
            "q": 0.5,
            "r": 0.25,
            "mesh_n": 1024
        }"#,
    );
    let out = steklov(
        &["--config", cfg2.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("delta,q,r,sigma_k,ceiling,deficit,lhs,rhs,verdict\n"));
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",pass"), "{line}");
    }
}

#[test]
fn blowup_command_certifies_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "blowup",
            "base": {"kind": "ball", "dim": 2, "radius": 1.0},
            "fiber": {"kind": "sphere", "dim": 4},
            "p": 1.0,
            "budget": 16.0,
            "eps_list": [0.0625, 0.03125],
            "mesh_n": 1024
        }"#,
    );
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("eps,peak,p_mass,budget,sigma_1,ceiling_n2,ratio_to_ceiling\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn failed_assertion_exits_1() {
    // An absurdly tight tolerance turns the conformal agreement into a
    // failing asserted verdict: outputs are still written, exit code is 1.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
            "command": "conformal",
            "base": {"kind": "interval", "length": 1.0},
            "warping": {"kind": "samples", "grid": [0.0, 0.5, 1.0], "values": [1.0, 2.0, 1.0]},
            "count": 3,
            "mesh_n": 256,
            "tolerance": 1e-15
        }"#,
    );
    let out = steklov(
        &["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn mesh_override_flag_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(&cfg, CYLINDER_SPECTRUM);
    let out = steklov(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--mesh",
            "64",
        ],
        &[],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("mesh 64 elements"), "{text}");
}
