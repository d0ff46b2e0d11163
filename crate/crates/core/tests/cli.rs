use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn shotlight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shotlight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate_to(dir: &TempDir) -> String {
    let map = dir.path().join("map.csv");
    stdout(&shotlight(&["simulate", "--out", path_str(&map)]));
    map.to_str().unwrap().to_owned()
}

#[test]
fn fano_curve_minimum_near_single_atom_contact() {
    let out = shotlight(&[
        "fano-curve",
        "--g-min",
        "0.5",
        "--g-max",
        "1.6",
        "--points",
        "1000",
        "--spacing",
        "linear",
    ]);
    let csv = stdout(&out);
    assert!(csv.starts_with("conductance_G0,fano\n"));
    let data = rows(&csv);
    assert_eq!(data.len(), 1000);
    let min = data.iter().min_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((min[0] - 0.93).abs() < 1.2e-3, "argmin {}", min[0]);
    assert!(min[1] < 0.072, "{}", min[1]);
}

#[test]
fn fano_curve_degenerate_range_is_invalid() {
    assert_eq!(
        code(&shotlight(&["fano-curve", "--g-min", "1", "--g-max", "1"])),
        2
    );
}

#[test]
fn fano_curve_three_atoms() {
    let args = [
        "fano-curve",
        "--saturations",
        "0.93,0.93,0.93,1.0",
        "--g-min",
        "2.5",
        "--g-max",
        "3.2",
        "--points",
        "200",
        "--spacing",
        "linear",
    ];
    let data = rows(&stdout(&shotlight(&args)));
    let interior = &data[1..data.len() - 1];
    let min = interior
        .iter()
        .min_by(|a, b| a[1].total_cmp(&b[1]))
        .unwrap();
    assert!((min[0] - 2.79).abs() < 0.01, "argmin {}", min[0]);

    let beyond = [
        "fano-curve",
        "--saturations",
        "0.93,0.93,0.93,1.0",
        "--g-min",
        "3",
        "--g-max",
        "4",
    ];
    assert_eq!(code(&shotlight(&beyond)), 2);
}

#[test]
fn noise_report_at_contact() {
    let v = json(&shotlight(&[
        "noise",
        "--channels",
        "0.93",
        "--voltage",
        "1.6",
        "--temperature",
        "2000",
    ]));
    assert!((v["normalized_yield"].as_f64().unwrap() - 0.2703).abs() < 1e-4);
    assert!((v["fano"].as_f64().unwrap() - 0.07).abs() < 1e-12);
    let shot = v["shot_noise"].as_f64().unwrap();
    let schottky = v["schottky"].as_f64().unwrap();
    assert!((shot / schottky - 0.07).abs() < 1e-8);
}

#[test]
fn noise_johnson_nyquist() {
    let v = json(&shotlight(&[
        "noise",
        "--channels",
        "1.0",
        "--voltage",
        "1e-12",
        "--temperature",
        "300",
    ]));
    let pt = v["thermal_noise"].as_f64().unwrap();
    assert!(((pt - 1.28369e-24) / 1.28369e-24).abs() < 5e-6, "{pt}");
}

#[test]
fn noise_without_bias_or_temperature_has_no_yield() {
    let v = json(&shotlight(&[
        "noise",
        "--channels",
        "0.5",
        "--voltage",
        "0",
        "--temperature",
        "0",
    ]));
    assert!(v["normalized_yield"].is_null());
    let warm = json(&shotlight(&[
        "noise",
        "--channels",
        "0.5",
        "--voltage",
        "0",
        "--temperature",
        "300",
    ]));
    assert!((warm["normalized_yield"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn noise_negative_voltage_is_accepted() {
    let pos = stdout(&shotlight(&[
        "noise",
        "--channels",
        "0.93",
        "--voltage",
        "1.6",
        "--temperature",
        "2000",
    ]));
    let neg = stdout(&shotlight(&[
        "noise",
        "--channels",
        "0.93",
        "--voltage",
        "-1.6",
        "--temperature",
        "2000",
    ]));
    assert_eq!(pos, neg);
}

#[test]
fn noise_rejects_closed_channels_only() {
    assert_eq!(
        code(&shotlight(&[
            "noise",
            "--channels",
            "0",
            "--voltage",
            "1.6",
            "--temperature",
            "300"
        ])),
        2
    );
    assert_eq!(
        code(&shotlight(&[
            "noise",
            "--channels",
            "1.2",
            "--voltage",
            "1.6",
            "--temperature",
            "300"
        ])),
        2
    );
}

#[test]
fn analyze_closed_loop() {
    let dir = TempDir::new().unwrap();
    let map = simulate_to(&dir);
    let csv = stdout(&shotlight(&["analyze", "--map", &map, "--voltage", "1.6"]));
    assert!(
        csv.starts_with("conductance_G0,current_A,intensity_1e,intensity_2e,yield_1e,yield_2e\n")
    );
    let data = rows(&csv);
    assert_eq!(data.len(), 60);
    let low: Vec<_> = data.iter().filter(|r| r[0] <= 0.01).collect();
    assert!(!low.is_empty());
    // below 0.93 G0 the two-channel model is a single channel with T = g
    let contact = data.iter().rev().find(|r| r[0] <= 0.93).unwrap();
    let noise = json(&shotlight(&[
        "noise",
        "--channels",
        &contact[0].to_string(),
        "--voltage",
        "1.6",
        "--temperature",
        "2000",
    ]));
    let expected = noise["normalized_yield"].as_f64().unwrap();
    assert!(
        (contact[4] - expected).abs() < 1e-7,
        "{} vs {expected}",
        contact[4]
    );
}

#[test]
fn analyze_missing_file_is_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    assert_eq!(
        code(&shotlight(&[
            "analyze",
            "--map",
            path_str(&missing),
            "--voltage",
            "1.6"
        ])),
        1
    );
}

#[test]
fn analyze_band_outside_grid_is_invalid() {
    let dir = TempDir::new().unwrap();
    let map = simulate_to(&dir);
    assert_eq!(
        code(&shotlight(&[
            "analyze",
            "--map",
            &map,
            "--voltage",
            "1.6",
            "--band-1e",
            "5,6"
        ])),
        2
    );
}

#[test]
fn analyze_malformed_map_is_invalid() {
    let dir = TempDir::new().unwrap();
    let map = dir.path().join("bad.csv");
    fs::write(
        &map,
        "step,displacement_nm,conductance_G0,E:1.0,E:1.01\n0,0,abc,1,1\n",
    )
    .unwrap();
    let out = shotlight(&["analyze", "--map", path_str(&map), "--voltage", "1.6"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn fit_temperature_recovers_generator() {
    let dir = TempDir::new().unwrap();
    let map = simulate_to(&dir);
    let yields = dir.path().join("yields.csv");
    stdout(&shotlight(&[
        "analyze",
        "--map",
        &map,
        "--voltage",
        "1.6",
        "--out",
        path_str(&yields),
    ]));
    let v = json(&shotlight(&[
        "fit-temperature",
        "--yields",
        path_str(&yields),
        "--voltage",
        "1.6",
    ]));
    let t = v["temperature"].as_f64().unwrap();
    assert!((t - 2000.0).abs() <= 1.0, "{t}");
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn fit_temperature_inverted_bounds_are_invalid() {
    let dir = TempDir::new().unwrap();
    let map = simulate_to(&dir);
    let yields = dir.path().join("yields.csv");
    stdout(&shotlight(&[
        "analyze",
        "--map",
        &map,
        "--voltage",
        "1.6",
        "--out",
        path_str(&yields),
    ]));
    let args = [
        "fit-temperature",
        "--yields",
        path_str(&yields),
        "--voltage",
        "1.6",
        "--t-min",
        "5000",
        "--t-max",
        "100",
    ];
    assert_eq!(code(&shotlight(&args)), 2);
}

#[test]
fn simulate_is_deterministic() {
    let a = stdout(&shotlight(&[
        "simulate", "--noise", "poisson", "--seed", "3",
    ]));
    let b = stdout(&shotlight(&[
        "simulate", "--noise", "poisson", "--seed", "3",
    ]));
    let c = stdout(&shotlight(&[
        "simulate", "--noise", "poisson", "--seed", "4",
    ]));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().count(), 61);
}

#[test]
fn simulate_reads_json_config() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"n_steps": 12, "temperature": 1500}"#).unwrap();
    let out = stdout(&shotlight(&["simulate", "--config", path_str(&config)]));
    assert_eq!(out.lines().count(), 13);
    let overridden = stdout(&shotlight(&[
        "simulate",
        "--config",
        path_str(&config),
        "--steps",
        "20",
    ]));
    assert_eq!(overridden.lines().count(), 21);
}

#[test]
fn simulate_invalid_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"n_steps": 1}"#).unwrap();
    assert_eq!(
        code(&shotlight(&["simulate", "--config", path_str(&config)])),
        2
    );
    fs::write(&config, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(
        code(&shotlight(&["simulate", "--config", path_str(&config)])),
        2
    );
    assert_eq!(code(&shotlight(&["simulate", "--voltage", "0"])), 2);
}

#[test]
fn mc_fano_matches_closed_form() {
    let v = json(&shotlight(&[
        "mc-fano",
        "--channels",
        "0.5",
        "--attempts",
        "200000",
        "--seed",
        "11",
    ]));
    let est = v["estimate"].as_f64().unwrap();
    let se = v["std_error"].as_f64().unwrap();
    assert_eq!(v["closed_form"].as_f64().unwrap(), 0.5);
    assert!((est - 0.5).abs() <= 3.0 * se, "{est} +- {se}");
}

#[test]
fn mc_fano_open_channel_is_noiseless() {
    let v = json(&shotlight(&[
        "mc-fano",
        "--channels",
        "1.0",
        "--attempts",
        "10000",
    ]));
    assert_eq!(v["estimate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["std_error"].as_f64().unwrap(), 0.0);
}

#[test]
fn mc_fano_too_few_attempts_is_invalid() {
    assert_eq!(
        code(&shotlight(&[
            "mc-fano",
            "--channels",
            "0.5",
            "--attempts",
            "999"
        ])),
        2
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&shotlight(&["no-such-command"])), 2);
    assert_eq!(code(&shotlight(&["noise", "--channels", "0.5"])), 2);
    assert_eq!(code(&shotlight(&["--help"])), 0);
}
