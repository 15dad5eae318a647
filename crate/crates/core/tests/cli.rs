use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trap-tail"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            let t = it.next().unwrap().parse().unwrap();
            let s = it.next().unwrap().parse().unwrap();
            (t, s)
        })
        .collect()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap()
}

#[test]
fn exact_is_reproducible_and_monotone() {
    let args = ["exact", "--grid", "log:1:1e4:8"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("t,survival,provenance,bound\n"));
    let rows = csv_rows(&text);
    assert!(rows.len() > 50);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 <= w[0].1));
    assert!(text.lines().nth(1).unwrap().contains(",exact,"));
    assert!(String::from_utf8(a.stderr).unwrap().contains("truncation bound"));
}

#[test]
fn simulate_writes_samples_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    let stats = dir.path().join("stats.json");
    let out = run(&[
        "simulate",
        "--samples",
        "20000",
        "--seed",
        "7",
        "--grid",
        "log:1:1e3:4",
        "--samples-out",
        samples.to_str().unwrap(),
        "--stats-out",
        stats.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",simulated,"));
    let lines = std::fs::read_to_string(&samples).unwrap();
    assert_eq!(lines.lines().count(), 20_001);
    let record: Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(record["pooled"]["samples"], 20_000);
}

#[test]
fn invalid_parameters_exit_with_usage_code() {
    let out = run(&["exact", "--alpha", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8(out.stderr).unwrap().is_empty());
    assert_eq!(run(&["exact", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(run(&["exact", "--grid", "lin:1:2:3"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_plot_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "t,survival,provenance,bound\n").unwrap();
    let out = run(&["plot", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, "").unwrap();
    assert_eq!(run(&["plot", "--input", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn coefficients_have_the_documented_shape() {
    let out = run(&["coefficients", "--modes", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rho"].as_f64(), Some(1.0));
    assert!((v["prefactor"].as_f64().unwrap() - std::f64::consts::LOG2_E).abs() < 1e-13);
    let modes = v["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    for (i, m) in modes.iter().enumerate() {
        assert_eq!(m["k"].as_u64(), Some(i as u64 + 1));
        for key in ["c", "d", "chi_re", "chi_im"] {
            assert!(m[key].is_number(), "{key}");
        }
    }
}

#[test]
fn mellin_reports_value_and_strip() {
    let out = run(&["mellin", "--alpha", "0.25", "--re", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value_re"].as_f64().unwrap() - 1.5).abs() < 1e-14);
    assert_eq!(v["in_strip"], true);
    assert_eq!(run(&["mellin", "--re", "1"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_defaults() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn corrupted_phase_is_caught_in_the_strongly_oscillating_regime() {
    let alpha = 10f64.powf(-1.5).to_string();
    let base = [
        "verify",
        "--alpha",
        alpha.as_str(),
        "--beta",
        "10",
        "--samples",
        "10000",
    ];
    let clean = run(&base);
    let report: Value = serde_json::from_slice(&clean.stdout).unwrap();
    assert_eq!(check(&report, "theorem_ratio")["pass"], true);

    let mut args = base.to_vec();
    args.push("--corrupt-phase");
    let bad = run(&args);
    assert_eq!(bad.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(check(&report, "theorem_ratio")["pass"], false);
}

#[test]
fn plot_without_modes_draws_a_flat_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plot.svg");
    let out = run(&[
        "plot",
        "--modes",
        "0",
        "--grid",
        "log:10:1e4:8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let g_line = svg
        .lines()
        .filter(|l| l.starts_with("<polyline"))
        .find(|l| l.contains("stroke-dasharray"))
        .expect("reference curve");
    let ys: Vec<&str> = g_line
        .split("points=\"")
        .nth(1)
        .unwrap()
        .trim_end_matches("\"/>")
        .split(' ')
        .map(|p| p.split(',').nth(1).unwrap())
        .collect();
    assert!(ys.len() > 10);
    assert!(ys.iter().all(|y| *y == ys[0]));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# defaults\nalpha = 0.25\nmodes = 2\n").unwrap();
    let out = run(&["coefficients", "--config", cfg.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rho"].as_f64(), Some(2.0));
    assert_eq!(v["modes"].as_array().unwrap().len(), 2);
    let out = run(&["coefficients", "--config", cfg.to_str().unwrap(), "--modes", "4"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["modes"].as_array().unwrap().len(), 4);
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(
        run(&["exact", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
