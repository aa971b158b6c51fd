//! External-surface checks: CLI determinism and exit codes, file formats,
//! and the documented JSON schemas.

use std::process::Command;

fn splitcert_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splitcert"))
}

#[test]
fn fritz_scan_is_byte_identical_across_runs() {
    let args = [
        "--command",
        "fritz-scan",
        "--eps-grid",
        "0:0.3:0.1",
        "--sanity",
        "300",
        "--seed",
        "11",
        "--jobs",
        "4",
    ];
    let run = || {
        let out = splitcert_cmd().args(args).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "outputs must be byte-identical");
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("epsilon,s_tables,s_closed_form,violated,v_min"));
    assert_eq!(text.lines().count(), 5);
    // 17 significant digits.
    assert!(text.contains("e-") || text.contains("e0"));
}

#[test]
fn usage_errors_exit_one() {
    let out = splitcert_cmd().arg("--nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = splitcert_cmd().output().unwrap(); // no command
    assert_eq!(out.status.code(), Some(1));

    let out = splitcert_cmd()
        .args(["--command", "fritz-scan", "--eps-grid", "bad"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn do_demo_reports_tiny_residuals() {
    let out = splitcert_cmd()
        .args(["--command", "do-demo", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    let residuals: Vec<f64> = rows
        .iter()
        .filter(|r| r["table"] == "residual")
        .map(|r| r["p"].as_f64().unwrap())
        .collect();
    assert_eq!(residuals.len(), 3);
    assert!(residuals.iter().all(|&r| r <= 1e-10));
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("splitcert-iface-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let out_path = dir.join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"command":"fritz-scan","eps-grid":"0:0.2:0.1","out":"{}"}}"#,
            out_path.display()
        ),
    )
    .unwrap();
    let out = splitcert_cmd()
        .args(["--config", cfg.to_str().unwrap(), "--eps-grid", "0:0.1:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read_to_string(&out_path).unwrap();
    // The flag grid (2 points) beats the file grid (3 points).
    assert_eq!(written.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn rgb4_scan_single_point_csv() {
    // One feasible grid point: quick end-to-end LP run through the binary.
    let out = splitcert_cmd()
        .args(["--command", "rgb4-scan", "--u-grid", "0.6:0.6:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "u,status_obs_only,status_obs_plus_int,witness_value"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("feasible,feasible"), "row: {row}");

    // And one certifying point carries a negative witness value.
    let out = splitcert_cmd()
        .args(["--command", "rgb4-scan", "--u-grid", "0.85:0.85:0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("feasible,infeasible,-"), "row: {row}");
}

#[test]
fn lp_text_file_round_trip() {
    use splitcert::inflation::certify::carrot_instance;
    use splitcert::inflation::lp::LinearProgram;
    use splitcert::scenarios::FritzParams;

    let instance = carrot_instance(&FritzParams::new(0.2)).unwrap();
    let text = instance.lp.to_text();
    assert!(text.starts_with("FEASLP v1\n"));
    let back = LinearProgram::from_text(&text).unwrap();
    assert_eq!(back.num_vars(), 32);
    // Same verdict from the parsed program.
    let a = splitcert::inflation::simplex::solve_feasibility(&instance.lp).unwrap();
    let b = splitcert::inflation::simplex::solve_feasibility(&back).unwrap();
    assert_eq!(a.is_feasible(), b.is_feasible());
}

#[test]
fn network_json_schema_example() {
    // The documented schema: a Bell pair measured in fixed bases.
    let doc = r#"{
        "observed": [{"name": "A", "card": 2}, {"name": "B", "card": 2}],
        "latent": ["λ"],
        "edges": [["λ", "A"], ["λ", "B"]],
        "states": {
            "λ": [[[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]],
                   [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                   [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                   [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]]
        },
        "povms": {
            "A": [[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]],
                   [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]],
            "B": [[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]],
                   [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]]
        }
    }"#;
    let strategy = splitcert::io::strategy_from_json(doc).unwrap();
    let table = splitcert::network::quantum_behavior(&strategy).unwrap();
    assert!((table.prob(&[0, 0], &[]) - 0.5).abs() < 1e-12);
    assert!((table.prob(&[1, 1], &[]) - 0.5).abs() < 1e-12);

    let seq = splitcert::io::split_sequence_from_json(r#"[["λ","A"]]"#).unwrap();
    let int = splitcert::splitting::interventional_behavior(&strategy, &seq).unwrap();
    for (outs, _, p) in int.iter() {
        let _ = outs;
        assert!((p - 0.25).abs() < 1e-12);
    }
}
