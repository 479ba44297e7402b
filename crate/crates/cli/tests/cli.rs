//! End-to-end runs of the `pptsq` binary: file formats, exit codes, and the
//! hand-assembled pipeline cross-check of a scan point.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pptsq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "pptsq {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_stdout(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn family_and_ppt_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("rho.json");
    run_ok(&[
        "family", "--name", "agkl", "--a", "1/2", "--t", "1/4",
        "--out", state.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&state).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["backend"], "rational");
    assert_eq!(json["rows"], 8);
    assert_eq!(json["entries_rational"][0][0], "1/2");

    let verdict = run_ok(&[
        "ppt", "--state", state.to_str().unwrap(), "--dim-a", "4", "--dim-b", "2",
    ]);
    let verdict: serde_json::Value = serde_json::from_str(&verdict).unwrap();
    assert_eq!(verdict["is_ppt"], true);
    assert_eq!(verdict["cut"][0], 4);
}

#[test]
fn family_rejects_missing_params() {
    let out = run(&["family", "--name", "agkl"]);
    assert!(!out.status.success());
    let out = run(&["family", "--name", "agkl", "--a", "0", "--t", "0"]);
    assert!(!out.status.success());
}

#[test]
fn choi_map_cli_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("rho.json");
    run_ok(&[
        "family", "--name", "agkl", "--a", "2/5", "--t", "1/5",
        "--out", state.to_str().unwrap(),
    ]);
    let map_json = run_ok(&[
        "map", "--choi", state.to_str().unwrap(), "--in-dim", "4", "--out-dim", "2",
    ]);
    let map_path = write_stdout(dir.path(), "phi1.json", &map_json);
    let back = dir.path().join("back.json");
    run_ok(&["choi", "--map", map_path.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    let original: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&state).unwrap()).unwrap();
    let round: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(original["entries_rational"], round["entries_rational"]);
}

/// One grid point of the scan, reassembled from individual CLI calls:
/// family → map (both cuts) → compose → choi → ppt. The scan record must
/// agree with the hand-built pipeline.
#[test]
fn scan_point_matches_manual_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);

    let rho = d("rho.json");
    run_ok(&["family", "--name", "agkl", "--a", "1/2", "--t", "1/4", "--out", rho.to_str().unwrap()]);

    let phi1 = write_stdout(
        dir.path(),
        "phi1.json",
        &run_ok(&["map", "--choi", rho.to_str().unwrap(), "--in-dim", "4", "--out-dim", "2"]),
    );
    let phi2 = write_stdout(
        dir.path(),
        "phi2.json",
        &run_ok(&["map", "--choi", rho.to_str().unwrap(), "--in-dim", "2", "--out-dim", "4"]),
    );
    let composite = d("composite.json");
    run_ok(&[
        "compose", "--outer", phi2.to_str().unwrap(), "--inner", phi1.to_str().unwrap(),
        "--out", composite.to_str().unwrap(),
    ]);
    let comp_choi = d("comp_choi.json");
    run_ok(&["choi", "--map", composite.to_str().unwrap(), "--out", comp_choi.to_str().unwrap()]);
    let manual: serde_json::Value = serde_json::from_str(&run_ok(&[
        "ppt", "--state", comp_choi.to_str().unwrap(), "--dim-a", "4", "--dim-b", "4",
    ]))
    .unwrap();
    assert_eq!(manual["is_ppt"], true);

    // now the scan on the same single point
    let grid = d("grid.json");
    std::fs::write(&grid, r#"{"points": [["1/2", "1/4"]]}"#).unwrap();
    let report_path = d("report.json");
    let out = run(&[
        "scan", "--family", "agkl", "--grid", grid.to_str().unwrap(),
        "--out", report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let record = &report["records"][0];
    assert_eq!(record["verdict"], "consistent");
    assert_eq!(record["composite_ppt"], true);
    assert_eq!(record["composite_rank"], 16);
    let manual_min = manual["min_eig_pt"].as_f64().unwrap();
    let scan_min = record["composite_pt_min_eig"].as_f64().unwrap();
    assert!((manual_min - scan_min).abs() < 1e-12);
}

#[test]
fn scan_csv_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"points": [["1/3", "1/6"], [0.5, 0.25]]}"#).unwrap();
    let csv_path = dir.path().join("report.csv");
    let out = run(&[
        "scan", "--family", "agkl", "--grid", grid.to_str().unwrap(),
        "--csv", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv_text.lines().count(), 3);
    assert!(csv_text.starts_with("a,t,in_regime"));

    // a = 0 cannot be constructed: anomaly, exit code 2
    std::fs::write(&grid, r#"{"points": [["0", "0"]]}"#).unwrap();
    let out = run(&["scan", "--family", "agkl", "--grid", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["scan", "--family", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan_decimal_grid_along_half_diagonal() {
    // a from 0.1 to 0.9 in steps of 0.1 with t = a/2: every record has a
    // full-rank PPT composite
    let dir = tempfile::tempdir().unwrap();
    let points: Vec<serde_json::Value> = (1..=9)
        .map(|k| {
            let a = format!("{k}/10");
            let t = format!("{k}/20");
            serde_json::json!([a, t])
        })
        .collect();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, serde_json::json!({ "points": points }).to_string()).unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "scan", "--family", "agkl", "--grid", grid.to_str().unwrap(),
        "--out", report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    for record in report["records"].as_array().unwrap() {
        assert_eq!(record["composite_ppt"], true, "{record}");
        assert_eq!(record["composite_rank"], 16, "{record}");
    }
}

#[test]
fn scan_supports_step_grids() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"{"a_steps": 3, "t_steps": 3}"#).unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "scan", "--family", "agkl", "--grid", grid.to_str().unwrap(),
        "--out", report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["summary"]["total"], 9);
    assert_eq!(report["summary"]["consistent"], 9);
}

#[test]
fn pair_command_reports_value() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("rho.json");
    run_ok(&["family", "--name", "choi3x3", "--out", state.to_str().unwrap()]);
    // witness: the transpose map on M3, written through the registry format
    let registry = dir.path().join("witnesses");
    pptsq_core::io::save_witness_registry(&registry, &pptsq_core::witness::builtin_registry(3))
        .unwrap();
    let value = run_ok(&[
        "pair", "--state", state.to_str().unwrap(),
        "--witness", registry.join("transpose-m3.json").to_str().unwrap(),
    ]);
    let value: serde_json::Value = serde_json::from_str(&value).unwrap();
    // the state is PPT and the transpose is decomposable: nonnegative
    assert!(value["value"].as_f64().unwrap() >= -1e-10);
}

#[test]
fn sqroot_finds_closed_form_root() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.json");
    let entries: Vec<serde_json::Value> = (0..16)
        .map(|at| {
            let (i, j) = (at / 4, at % 4);
            let v = match (i, j) {
                (0, 0) | (3, 3) => "17/4",
                (1, 1) | (2, 2) => "2",
                (0, 3) | (3, 0) => "1/9",
                _ => "0",
            };
            serde_json::json!([v, "0"])
        })
        .collect();
    let matrix = serde_json::json!({
        "rows": 4, "cols": 4, "backend": "rational",
        "entries": (0..16).map(|_| [0.0, 0.0]).collect::<Vec<_>>(),
        "entries_rational": entries,
    });
    std::fs::write(&target, serde_json::to_string(&matrix).unwrap()).unwrap();
    let out = run_ok(&[
        "sqroot", "--target", target.to_str().unwrap(), "--dims", "2,2,2",
        "--mode", "square", "--restarts", "6", "--seed", "1",
    ]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(json["count"].as_u64().unwrap() >= 1);
    let best = &json["solutions"][0];
    assert!(best["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(best["verification"]["is_ppt_factor1"], true);
    assert_eq!(best["verification"]["residual_ok"], true);
}

#[test]
fn shipped_witness_registry_loads() {
    // the in-repo registry mirrors the builtin set for maps on M4
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../witnesses/m4");
    let loaded = pptsq_core::io::load_witness_registry(&dir).unwrap();
    assert_eq!(loaded.len(), 4);
    for w in &loaded {
        assert_eq!(w.cut(), (4, 4));
    }
}
