//! End-to-end checks of the command-line surface: flags, file formats,
//! determinism, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn theory_table_prints_known_values() {
    let out = qsl(&["theory", "--m-grid", "2", "--n-grid", "20", "--p-grid", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# qsl-schema v1\n"));
    assert!(text.contains("m,n,p,expected_error,expected_distance,error_bound"));
    // 2^-22 and m/(2m-2) at m=2.
    assert!(text.contains("2,20,0,0.0000002384185791015625,1,"));
}

#[test]
fn search_trace_matches_hand_computation() {
    let out = qsl(&[
        "search", "--algo", "dqs", "--theta", "0.375", "--m", "4", "--epsilon", "0.01",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "step,x,y,a,b,cum_distance");
    assert!(lines[2].starts_with("1,0.25,1,"));
    assert!(lines[3].starts_with("2,0.4375,0,"));
}

#[test]
fn noisy_runs_require_a_seed() {
    let out = qsl(&["search", "--algo", "pqs", "--theta", "0.4", "--p", "0.1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed"), "unhelpful message: {err}");

    let out = qsl(&[
        "sweep", "--kind", "sweep_m", "--strategies", "tpqs", "--p", "0.1", "--theta-grid", "4",
    ]);
    assert!(!out.status.success());
}

#[test]
fn sweep_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "sweep".to_string(),
            "--kind".into(),
            "sweep_m".into(),
            "--strategies".into(),
            "pqs,tpqs".into(),
            "--m-grid".into(),
            "2,5".into(),
            "--theta-grid".into(),
            "6".into(),
            "--replicates".into(),
            "3".into(),
            "--p".into(),
            "0.1".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let run1 = Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args(&first))
        .output()
        .unwrap();
    assert!(run1.status.success(), "{}", String::from_utf8_lossy(&run1.stderr));
    let run2 = Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args(&second))
        .output()
        .unwrap();
    assert!(run2.status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn spec_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{
            "kind": "error_curve",
            "strategies": ["dqs"],
            "theta_grid": 16,
            "m_grid": [2.0],
            "n_samples": 5
        }"#,
    )
    .unwrap();
    let out = qsl(&[
        "sweep",
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "sweep_lambda",
        "--theta-grid",
        "99",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    // One dqs row from the spec file, not a lambda sweep.
    assert!(text.contains("dqs,2,"));
    assert!(!text.contains("proactive"));
}

#[test]
fn region_and_mission_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let region = dir.path().join("region.txt");
    let out = qsl(&[
        "region",
        "gen",
        "--shape",
        "smooth_blob",
        "--ncols",
        "200",
        "--nrows",
        "100",
        "--cell-size",
        "200",
        "--seed",
        "7",
        "--out",
        region.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&region).unwrap();
    assert!(text.starts_with("ncols 200\nnrows 100\n"));

    let mission = dir.path().join("mission.json");
    fs::write(
        &mission,
        format!(
            r#"{{
                "region_file": "{}",
                "plan": {{ "layout": "vertical", "k": 5,
                          "x_range": [12000.0, 28000.0],
                          "y_from": 20000.0, "y_to": 10000.0 }},
                "strategy": "dqs",
                "m": 5.0,
                "params": {{ "epsilon": 0.001, "delta": 0.001, "p": 0.0,
                            "p_update": null, "stop_mass": 0.9, "max_steps": null }},
                "improvements": "I1",
                "gamma_s": 10.0,
                "velocity_mps": 0.5,
                "seed": 3
            }}"#,
            region.display()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("mission_out");
    let out = qsl(&[
        "mission",
        "--spec",
        mission.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let boundary = fs::read_to_string(out_dir.join("boundary.csv")).unwrap();
    assert_eq!(boundary.lines().count(), 2 + 5, "one row per strip");
    assert!(fs::read_to_string(out_dir.join("polyline.csv"))
        .unwrap()
        .starts_with("# qsl-schema v1\nx,y\n"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["strategy"], "dqs");
    assert_eq!(report["strips"], 5);
    assert!(report["total_time_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_equivalence_suite_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = qsl(&[
        "verify",
        "--suite",
        "equivalence",
        "--seed",
        "7",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("PASS m2_trace_identity"));
    assert!(text.contains("PASSED: suite equivalence"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = qsl(&["verify", "--suite", "nonsense"]);
    assert!(!out.status.success());
}

#[test]
fn compare_grid_emits_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cells = dir.path().join("cells.csv");
    let contour = dir.path().join("contour.csv");
    let out = qsl(&[
        "compare",
        "--gamma-grid",
        "1,60",
        "--velocity-grid",
        "0.5,4",
        "--m-grid",
        "2,10",
        "--lambda-grid",
        "0,0.5",
        "--theta-grid",
        "5",
        "--replicates",
        "2",
        "--p",
        "0.1",
        "--seed",
        "9",
        "--out",
        cells.to_str().unwrap(),
        "--contour",
        contour.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cells_text = fs::read_to_string(&cells).unwrap();
    assert_eq!(cells_text.lines().count(), 2 + 4, "four scenario cells");
    assert!(fs::read_to_string(&contour)
        .unwrap()
        .starts_with("# qsl-schema v1\ngamma_s,velocity_mps\n"));
}
