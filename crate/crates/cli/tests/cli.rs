use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn eband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eband")).args(args).env_remove("EBAND_OUT_DIR").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eband-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Free-space SNR with 0.5 dB/km atmosphere and the 25 mm/h rain rate, from scratch.
fn los_snr(tx_dbm: f64, gains_dbi: f64, d: f64) -> f64 {
    let lambda = 2.998e8 / 73.5e9;
    let fspl = 20.0 * (4.0 * std::f64::consts::PI * d / lambda).log10();
    tx_dbm + gains_dbi - fspl - 0.5 * d / 1e3 - 10.0 * d / 1e3 + 71.0
}

#[test]
fn linkbudget_itemizes_rain() {
    let o = eband(&["linkbudget", "--freq-ghz", "73.5", "--dist-m", "200", "--rain-mmh", "25"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rain = text.lines().find(|l| l.contains("rain loss")).unwrap();
    assert!(rain.contains("2.00 dB"), "{rain}");
}

#[test]
fn linkbudget_json_matches_hand_calculation() {
    let o = eband(&[
        "linkbudget",
        "--freq-ghz",
        "73.5",
        "--dist-m",
        "200",
        "--rain-mmh",
        "25",
        "--txpower-dbm",
        "30",
        "--gain-tx-dbi",
        "30",
        "--gain-rx-dbi",
        "20",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    let snr = v["report"]["snr"].as_f64().unwrap();
    assert!((snr - los_snr(30.0, 50.0, 200.0)).abs() < 1e-9, "{snr}");
    assert!((v["report"]["atmospheric_loss"].as_f64().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn linkbudget_errors() {
    assert_eq!(eband(&["linkbudget", "--dist-m", "0"]).status.code(), Some(2));
    assert_eq!(eband(&["linkbudget", "--dist-m", "10", "--txpower-dbm", "40"]).status.code(), Some(4));
    assert_eq!(eband(&["linkbudget", "--dist-m", "10", "--txpower-dbm", "40", "--force"]).status.code(), Some(0));
    assert_eq!(eband(&["linkbudget", "--dist-m", "10", "--freq-ghz", "60"]).status.code(), Some(2));
    assert_eq!(eband(&["linkbudget", "--dist-m", "ten"]).status.code(), Some(2));
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn eigencurves_default_sweep() {
    let o = eband(&["eigencurves", "--nt", "20", "--nr", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 20 + 20 + 1);
    assert_eq!(header[21], "ratio_1");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 200);
    let d_ray = 20.0 * 0.05 * 0.05 / (2.998e8 / 75e9);
    let at = rows.iter().find(|r| (r[0] - d_ray).abs() < 1e-9 * d_ray).expect("row at D_Ray");
    for ratio in &at[21..41] {
        assert!((ratio - 1.0).abs() < 1e-9);
    }
    assert_eq!(at[41], 20.0);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("D_Ray = 12.5083 m"), "{err}");
}

#[test]
fn eigencurves_single_point_is_rayleigh_distance() {
    let o = eband(&["eigencurves", "--points", "1"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][41], 20.0);

    let o = eband(&["eigencurves", "--points", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn numerology_reports() {
    let o = eband(&["numerology", "--preset", "emb"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5);
    assert!(text.contains("860 kHz vs 960 kHz"));

    let o = eband(&["numerology", "--preset", "emb", "--clock-ppm", "25"]);
    let text = stdout(&o);
    let drift = text.lines().find(|l| l.contains("clock drift")).unwrap();
    assert!(drift.starts_with("FAIL") && drift.contains("2150 kHz"), "{drift}");

    let o = eband(&["numerology", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["all_passed"], true);
}

#[test]
fn numerology_layout_export() {
    let path = scratch("layout.csv");
    let o = eband(&["numerology", "--export-layout", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<u64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10 * 32 * 14);
    let last = rows.last().unwrap();
    assert_eq!(last[4] + last[5] + last[6] - 1, 2_457_599);
}

#[test]
fn numerology_custom_errors() {
    let bad = scratch("bad_numerology.json");
    std::fs::write(
        &bad,
        r#"{"sampling_rate_hz":245760000,"subcarrier_spacing_hz":480000,"fft_size":512,"symbols_per_slot":14,
            "cp_first":40,"cp_rest":36,"slots_per_subframe":32,"subframes_per_frame":10}"#,
    )
    .unwrap();
    let o = eband(&["numerology", "--custom", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("slots_per_subframe"));

    let junk = scratch("junk.json");
    std::fs::write(&junk, r#"{"fft_size": 512, "extra": 1}"#).unwrap();
    assert_eq!(eband(&["numerology", "--custom", junk.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(eband(&["numerology", "--custom", "/nonexistent/n.json"]).status.code(), Some(6));
}

#[test]
fn chanplan_regions() {
    let count = |region: &str| {
        let o = eband(&["chanplan", "--region", region]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["schema_version"], 1);
        v["channels"].as_array().unwrap().len()
    };
    assert_eq!(count("eu"), 38);
    assert_eq!(count("us"), 8);
    assert_eq!(eband(&["chanplan", "--region", "eu", "--aggregate", "1..20"]).status.code(), Some(4));
    assert_eq!(eband(&["chanplan", "--region", "us", "--aggregate", "4..5"]).status.code(), Some(4));
    assert_eq!(eband(&["chanplan", "--region", "mars"]).status.code(), Some(2));
    let o = eband(&["chanplan", "--region", "eu", "--aggregate", "1..19"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["aggregate"]["width_mhz"], 4750);
}

#[test]
fn coopsim_matches_golden_output() {
    let scenario = data("street_canyon.json");
    let json_out = scratch("golden_run.json");
    let csv_out = scratch("golden_run.csv");
    for (fmt, out) in [("json", &json_out), ("csv", &csv_out)] {
        let o = eband(&[
            "coopsim",
            "--scenario",
            scenario.to_str().unwrap(),
            "--drops",
            "1",
            "--format",
            fmt,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8(o.stderr).unwrap().contains("seed = 2024"));
    }
    assert_eq!(std::fs::read(&json_out).unwrap(), std::fs::read(data("street_canyon.golden.json")).unwrap());
    assert_eq!(std::fs::read(&csv_out).unwrap(), std::fs::read(data("street_canyon.golden.csv")).unwrap());
}

#[test]
fn golden_output_agrees_with_hand_link_budgets() {
    let text = std::fs::read_to_string(data("street_canyon.golden.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let num = |s: &str| s.parse::<f64>().unwrap();
    let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    // BS 30 dBm / 30 dBi, users 20 dBi, user links 23 dBm; all paths below are unobstructed
    let checks = [
        (rows[0][4], los_snr(30.0, 50.0, dist((20.0, 100.0), (100.0, 100.0)))),
        (rows[2][4], los_snr(30.0, 50.0, dist((280.0, 20.0), (200.0, 60.0)))),
        (rows[4][4], los_snr(30.0, 50.0, dist((280.0, 20.0), (260.0, 180.0)))),
        (rows[1][5], los_snr(23.0, 40.0, dist((100.0, 100.0), (100.0, 180.0)))),
        (rows[3][5], los_snr(23.0, 40.0, dist((150.0, 190.0), (260.0, 180.0)))),
    ];
    for (got, want) in checks {
        assert!((num(got) - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert_eq!(rows[1][1], "IS_served");
    assert_eq!(rows[1][3], "0");
}

#[test]
fn coopsim_is_repeatable_and_honours_out_dir() {
    let dir = scratch("outdir");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_eband"))
            .args(["coopsim", "--scenario", data("street_canyon.json").to_str().unwrap(), "--drops", "20"])
            .args(["--set", "placement=\"uniform\"", "--set", "weather.rain_mm_per_h=5"])
            .env("EBAND_OUT_DIR", &dir)
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    let first = std::fs::read(dir.join("coverage.json")).unwrap();
    assert!(run().status.success());
    assert_eq!(first, std::fs::read(dir.join("coverage.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["drops"], 20);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn coopsim_errors() {
    let s = data("street_canyon.json");
    let s = s.to_str().unwrap();
    assert_eq!(eband(&["coopsim", "--scenario", s, "--drops", "0"]).status.code(), Some(2));
    assert_eq!(eband(&["coopsim", "--scenario", s, "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(eband(&["coopsim", "--scenario", s, "--set", "carrier_ghz=60"]).status.code(), Some(3));

    let bad = scratch("bad_scenario.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data("street_canyon.json")).unwrap()).unwrap();
    v["base_stations"][0]["tx_power_dbm"] = serde_json::json!(40.0);
    v["users"][0]["x"] = serde_json::json!(-5.0);
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = eband(&["coopsim", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("base_stations[0].tx_power_dbm") && err.contains("users[0]"), "{err}");
}
