use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn launchsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_launchsde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn table(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(launchsde(&["--help"]).status.code(), Some(0));
    assert_eq!(launchsde(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one_with_json() {
    for args in [
        vec!["bogus"],
        vec![],
        vec!["verify", "--checks", "nonsense"],
        vec!["verify", "--checks", ","],
        vec!["simulate", "--threads", "0"],
        vec!["analytic", "--horizons", "1,x"],
        vec!["figure1", "--alphas", "0.05"],
    ] {
        let out = launchsde(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = error_json(&out);
        assert_eq!(err["error"]["exit_code"], 1, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"system": {"r": 1, "sigmaa": 100}}"#,
        r#"{"system": {"r": -1}}"#,
        r#"{"rule": {"alpha": 1.5}}"#,
        r#"not json"#,
        r#"{"update_bias": {"gamma_r": 2, "gamma_sigma": 4},
            "objective_bias": {"r_prime": 1, "sigma_prime": 50, "mu": 0}}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let out = launchsde(&["analytic", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(1), "{body}");
        assert_eq!(error_json(&out)["error"]["kind"], "config", "{body}");
    }
    let out = launchsde(&["analytic", "--config", "/nonexistent/config.json"]);
    assert_ne!(out.status.code(), Some(0));
    error_json(&out);
}

#[test]
fn both_biases_rejected_as_mutually_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"update_bias": {"gamma_r": 2, "gamma_sigma": 4},
            "objective_bias": {"r_prime": 1, "sigma_prime": 50, "mu": 0}}"#,
    );
    let out = launchsde(&["simulate", "--config", &cfg]);
    let msg = error_json(&out)["error"]["message"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(msg.contains("mutually exclusive"), "{msg}");
}

#[test]
fn resource_limit_exits_three() {
    let out = launchsde(&["simulate", "--replicas", "1000000", "--steps", "100000"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["exit_code"], 3);
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = launchsde(&["analytic", "--emit-config", "--seed", "7", "--alpha", "0.2"]);
    assert!(first.status.success());
    let text = stdout(&first);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["sim"]["seed"], 7);
    assert_eq!(doc["rule"]["alpha"], 0.2);
    let cfg = write_config(dir.path(), &text);
    let second = launchsde(&["analytic", "--emit-config", "--config", &cfg]);
    assert_eq!(text, stdout(&second));

    let a = launchsde(&["analytic", "--config", &cfg]);
    let b = launchsde(&["analytic", "--seed", "7", "--alpha", "0.2"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn csv_carries_schema_and_config_hash() {
    let out = launchsde(&["simulate", "--replicas", "1", "--steps", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#schema=simulate:1"));
    let hash = lines
        .next()
        .unwrap()
        .strip_prefix("#config_sha256=")
        .unwrap();
    assert_eq!(hash.len(), 64);
    let rows = table(&text);
    assert_eq!(rows.first().unwrap()[0], "0");
    assert_eq!(rows.last().unwrap()[0], "10");
}

#[test]
fn json_output_wraps_config_and_result() {
    let out = launchsde(&["analytic", "--format", "json", "--horizons", "0,100"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], "analytic:1");
    assert_eq!(doc["config"]["system"]["sigma"], 100.0);
    assert!(doc["result"].is_object() || doc["result"].is_array());
}

#[test]
fn analytic_rows() {
    let out = launchsde(&["analytic", "--horizons", "0,1000", "--x0", "50"]);
    let rows = table(&stdout(&out));
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][..3], ["0", "50", "0"]);
    let last = &rows[2];
    assert_eq!(last[0], "inf");
    assert_eq!(last[4], "1");
    let gap: f64 = -last[3].parse::<f64>().unwrap();
    assert!((gap - 12.12).abs() < 0.01, "{gap}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"system": {"optimum": 3}}"#);
    let shifted = table(&stdout(&launchsde(&[
        "analytic",
        "--config",
        &cfg,
        "--horizons",
        "0,1000",
        "--x0",
        "50",
    ])));
    assert_eq!(shifted[1][1], rows[1][1]);
    let delta: f64 = shifted[1][3].parse::<f64>().unwrap() - rows[1][3].parse::<f64>().unwrap();
    assert!((delta - 3.0).abs() < 1e-6, "{delta}");
}

#[test]
fn update_bias_sweep_diagonal_is_neutral() {
    let out = launchsde(&["sweep", "--kind", "update-bias"]);
    let rows = table(&stdout(&out));
    assert_eq!(rows.len(), 16);
    for row in rows {
        let (gr, gs): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let expected = match gs.partial_cmp(&gr).unwrap() {
            std::cmp::Ordering::Equal => "neutral",
            std::cmp::Ordering::Greater => "improve",
            std::cmp::Ordering::Less => "worsen",
        };
        assert_eq!(row[6], expected, "{row:?}");
    }
}

#[test]
fn objective_frontier_sweep_matches_condition() {
    let out = launchsde(&[
        "sweep",
        "--kind",
        "objective-frontier",
        "--gamma",
        "2",
        "--mu",
        "-4,0,3,3.4,3.6,5",
    ]);
    let rows = table(&stdout(&out));
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let mu: f64 = row[1].parse().unwrap();
        let frontier: f64 = row[7].parse().unwrap();
        assert!((frontier - 3.482).abs() < 1e-3);
        assert_eq!(row[5] == "1", mu.abs() < frontier, "{row:?}");
    }
    let neutral = table(&stdout(&launchsde(&[
        "sweep",
        "--kind",
        "objective-frontier",
        "--gamma",
        "1",
        "--mu",
        "0",
    ])));
    assert_eq!(neutral[0][6], "neutral");
    assert_eq!(neutral[0][7], "");
}

#[test]
fn threshold_sweep_reports_crossovers() {
    let out = launchsde(&["sweep", "--kind", "threshold", "--alphas", "0.05,0.4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("#schema=sweep_threshold:1"));
    assert!(text.lines().any(|l| l.starts_with("#crossover=0.05,0.4,")));
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let ok = launchsde(&["verify", "--checks", "drift,gap"]);
    assert_eq!(ok.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(doc["result"]["pass"], true);

    let bad = launchsde(&["verify", "--checks", "drift,mc", "--negative-control"]);
    assert_eq!(bad.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&bad)).unwrap();
    assert_eq!(doc["result"]["pass"], false);
    let err = error_json(&bad);
    assert_eq!(err["error"]["kind"], "verification");
    assert!(!err["error"]["failing"].as_array().unwrap().is_empty());
}

#[test]
fn files_and_svg_written() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fig.csv");
    let svg_path = dir.path().join("fig.svg");
    let out = launchsde(&[
        "figure1",
        "--replicas",
        "200",
        "--steps",
        "3000",
        "--out",
        out_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(out_path).unwrap();
    assert!(csv.starts_with("#schema=figure1:1"));
    assert!(csv.lines().any(|l| l.starts_with("#ratio=")));
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn trajectories_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("paths.csv");
    let out = launchsde(&[
        "simulate",
        "--replicas",
        "3",
        "--steps",
        "20",
        "--trajectories",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("#schema=trajectories:1"));
    assert!(table(&text).len() >= 3);
}
