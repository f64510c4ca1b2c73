use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netsdp::sdp::{read_sdpa, write_sdpa};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netsdp"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("NETSDP_GAP_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_bad_flags() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("scan-efficiency"));
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = run(&[
        "solve",
        "-c",
        "/nonexistent.json",
        "-l",
        &cfg("level3.json"),
        "-d",
        &cfg("p22.json"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_reports_json() {
    let args = [
        "solve",
        "-c",
        &cfg("line.json"),
        "-l",
        &cfg("level3.json"),
        "-d",
        &cfg("p22.json"),
        "--v",
        "0.6",
    ];
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "incompatible");
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["dimension"], 71);
    assert!(v["t_star"].as_f64().unwrap() < -1e-6);
    assert_eq!(v["config_echo"]["distribution_spec"]["v"], 0.6);
    // reproducible byte for byte
    assert_eq!(stdout(&run(&args)), stdout(&o));
}

#[test]
fn gap_tolerance_from_environment() {
    let o = bin()
        .args([
            "solve",
            "-c",
            &cfg("line_classical.json"),
            "-l",
            &cfg("commuting_s3.json"),
            "-d",
            &cfg("p22.json"),
        ])
        .env("NETSDP_GAP_TOL", "1e-7")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config_echo"]["gap_tol"], 1e-7);
}

#[test]
fn export_sdpa_writes_parseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.dat-s");
    let o = run(&[
        "export-sdpa",
        "-c",
        &cfg("line_classical.json"),
        "-l",
        &cfg("commuting_s3.json"),
        "-d",
        &cfg("p22.json"),
        "--v",
        "0.3",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let p = read_sdpa(&text).unwrap();
    assert_eq!(write_sdpa(&p), text);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "1");
    assert_eq!(lines[2].parse::<usize>().unwrap(), p.n);
    assert_eq!(lines[0].parse::<usize>().unwrap(), p.variables() + 1);
}

#[test]
fn visibility_scan() {
    let base = [
        "scan-visibility",
        "-c",
        &cfg("line_classical.json"),
        "-l",
        &cfg("commuting_s3.json"),
        "-d",
        &cfg("p22.json"),
    ];
    let mut args = base.to_vec();
    args.extend(["--tol", "0.002"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["threshold"].as_f64().unwrap() - 0.25).abs() <= 0.005);
    let mut degenerate = base.to_vec();
    degenerate.extend(["--lo", "0", "--hi", "0"]);
    assert_eq!(run(&degenerate).status.code(), Some(1));
}

#[test]
fn efficiency_scan_csv() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(
        &grid,
        r#"{"eta_a": [0.0, 1.0], "eta_c": 0.0, "theta_ab": 0.7853981633974483,
            "theta_bc": [0.3, 0.7853981633974483], "alpha0": 0.5, "alpha1": 0.9}"#,
    )
    .unwrap();
    let args = [
        "scan-efficiency",
        "-c",
        &cfg("swap.json"),
        "-l",
        &cfg("swap_level.json"),
        "-g",
        grid.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0],
        "eta_a,eta_c,theta_ab,theta_bc,alpha0,alpha1,t_star,verdict"
    );
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("0.0,0.0,0.7853981633974483,0.3,"));
    assert!(rows[4].starts_with("1.0,0.0,0.7853981633974483,0.7853981633974483,"));
    for r in &rows[1..] {
        assert!(r.ends_with(",not refuted at this level"), "{r}");
    }
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(stdout(&run(&seq)), text);
}

#[test]
fn stats_command() {
    let o = run(&[
        "stats",
        "-c",
        &cfg("line.json"),
        "-l",
        &cfg("commuting_s3.json"),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dimension"], 64);
}
