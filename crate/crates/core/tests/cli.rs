use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lucas_uzawa::commands::{prepare, trajectory_row, TRAJECTORY_COLUMNS};
use lucas_uzawa::config::RunConfig;
use tempfile::TempDir;

const P1_BASE: &str = r#""beta":0.5,"sigma":2,"rho":0.04,"delta":0.05,"gamma":0.1,"pi":0,"theta":0"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lucas-uzawa"))
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, format!("{{{P1_BASE},{body}}}")).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn solve_writes_bgp_trajectory() {
    let tmp = TempDir::new().unwrap();
    let out = run("solve", &shipped("p1_bgp.json"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("trajectory.csv"));
    assert_eq!(header, TRAJECTORY_COLUMNS);
    assert_eq!(rows.len(), 2001);
    let first = &rows[0];
    let expected = [
        ("t", 0.0),
        ("k", 1.0),
        ("h", 1.111111),
        ("c", 0.095),
        ("u_form1", 0.9),
        ("u_form2", 0.9),
        ("z", 1.0),
        ("lambda", 110.80332),
        ("mu", 110.80332),
    ];
    for (i, (name, value)) in expected.iter().enumerate() {
        assert_eq!(header[i], *name);
        assert!(
            (num(&first[i]) - value).abs() <= 1e-6 * value.max(1.0),
            "{name} = {}",
            first[i]
        );
    }
    let calibration: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("calibration.json")).unwrap()).unwrap();
    assert!((calibration["calibration"]["u0"].as_f64().unwrap() - 0.9).abs() < 1e-8);
    assert!((calibration["welfare"].as_f64().unwrap() + 208.9181).abs() < 1e-3);
}

#[test]
fn solve_round_trips_to_printed_precision() {
    let tmp = TempDir::new().unwrap();
    let config_path = shipped("p1_offbgp.json");
    assert_eq!(run("solve", &config_path, tmp.path(), &[]).status.code(), Some(0));
    let (_, rows) = csv_rows(&tmp.path().join("trajectory.csv"));
    let sol = prepare(&RunConfig::load(&config_path).unwrap()).unwrap();
    for row in rows.iter().step_by(97) {
        let t = num(&row[0]);
        let expected = trajectory_row(&sol, t).unwrap();
        // Residual columns are finite-difference noise; compare the states.
        for (i, cell) in row.iter().enumerate().take(11) {
            let e = expected[i];
            assert!(
                (num(cell) - e).abs() <= 1e-11 * e.abs(),
                "{} at t = {t}: {cell} vs {e}",
                TRAJECTORY_COLUMNS[i]
            );
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for cmd in ["solve", "verify", "compare"] {
        for dir in [&a, &b] {
            let out = run(cmd, &shipped("p1_offbgp.json"), dir.path(), &[]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{cmd}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
    for dir in [&a, &b] {
        assert_eq!(
            run("sweep", &shipped("sweep_theta.json"), dir.path(), &[])
                .status
                .code(),
            Some(0)
        );
    }
    for file in [
        "trajectory.csv",
        "calibration.json",
        "verification.json",
        "comparison.csv",
        "sweep.csv",
    ] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}

#[test]
fn sigma_equal_to_beta_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("c.json");
    fs::write(
        &config,
        r#"{"beta":0.5,"sigma":0.5,"rho":0.04,"delta":0.05,"gamma":0.1,"pi":0,"theta":0,"k0":1,"h0":1}"#,
    )
    .unwrap();
    let out = run("solve", &config, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma equals beta"));
}

#[test]
fn infeasible_saddle_integrals_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("c.json");
    fs::write(
        &config,
        r#"{"beta":0.5,"sigma":0.6,"rho":0.01,"delta":0.1,"gamma":0.1,"pi":0,"theta":0,"k0":1,"h0":1}"#,
    )
    .unwrap();
    let out = run("verify", &config, &tmp.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xi<=varphi"));
}

#[test]
fn bad_or_missing_config() {
    let tmp = TempDir::new().unwrap();
    let out = run("solve", &tmp.path().join("missing.json"), tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    let config = write_config(tmp.path(), r#""k0":1,"h0":1,"unknown":3"#);
    assert_eq!(run("solve", &config, tmp.path(), &[]).status.code(), Some(1));
    let config = write_config(tmp.path(), r#""k0":-1,"h0":1"#);
    assert_eq!(run("solve", &config, tmp.path(), &[]).status.code(), Some(1));
}

#[test]
fn unwritable_output_directory() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = run("solve", &shipped("p1_bgp.json"), &blocker.join("out"), &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_passes_on_bgp_and_fails_on_forged_control() {
    let tmp = TempDir::new().unwrap();
    let ok = run("verify", &shipped("p1_bgp.json"), tmp.path(), &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let forged_dir = tmp.path().join("forged");
    let forged = run("verify", &shipped("p1_bgp.json"), &forged_dir, &["--force-u0", "1.5"]);
    assert_eq!(forged.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(forged_dir.join("verification.json")).unwrap()).unwrap();
    assert_eq!(report["overall"], "fail");
    assert_eq!(report["admissibility"]["verdict"], "fail");
    assert_eq!(report["admissibility"]["violations"][0]["t"], 0.0);
}

#[test]
fn compare_on_bgp_is_flat() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        run("compare", &shipped("p1_bgp.json"), tmp.path(), &[]).status.code(),
        Some(0)
    );
    let (header, rows) = csv_rows(&tmp.path().join("comparison.csv"));
    assert_eq!(&header[1..5], ["u_form1", "u_form2", "u_simulated", "u_scalar_ode"]);
    assert_eq!(rows.len(), 501);
    for row in &rows {
        for cell in &row[1..5] {
            assert!((num(cell) - 0.9).abs() < 1e-9, "{row:?}");
        }
    }
}

#[test]
fn compare_with_zero_horizon_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), r#""k0":1,"h0":1,"compare_horizon":0"#);
    assert_eq!(run("compare", &config, tmp.path(), &[]).status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn sweep_over_theta() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        run("sweep", &shipped("sweep_theta.json"), tmp.path(), &[])
            .status
            .code(),
        Some(0)
    );
    let (header, rows) = csv_rows(&tmp.path().join("sweep.csv"));
    assert_eq!(header[0], "theta");
    assert_eq!(rows.len(), 3);
    let thetas: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
    assert_eq!(thetas, [0.0, 0.05, 0.1]);
    assert_eq!(rows[0][1], "ok");
    assert!((num(&rows[0][2]) - 0.9).abs() < 1e-9);
}

#[test]
fn sweep_records_infeasible_points() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        r#""k0":1,"h0":1,"sweep":{"sigma":[2.0,0.6],"rho":[0.01],"delta":[0.1]}"#,
    );
    assert_eq!(run("sweep", &config, tmp.path(), &[]).status.code(), Some(0));
    let (header, rows) = csv_rows(&tmp.path().join("sweep.csv"));
    assert_eq!(&header[..4], ["sigma", "rho", "delta", "status"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "0.6");
    assert_eq!(rows[0][3], "infeasible: xi<=varphi");
    assert_eq!(rows[1][3], "ok");
}

#[test]
fn sweep_with_empty_range_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), r#""k0":1,"h0":1,"sweep":{"theta":[]}"#);
    assert_eq!(run("sweep", &config, tmp.path(), &[]).status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}
