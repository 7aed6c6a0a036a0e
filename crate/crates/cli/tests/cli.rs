use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wqc_cli::io::{decode_matrix, read_csv, sha256_hex, MatrixSidecar};

fn wqc(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wqc"));
    c.args(args).current_dir(dir).env_remove("WQC_SEED").env_remove("WQC_OUT").env_remove("WQC_CONFIG");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV text without the provenance comment.
fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

const SMALL: &str = "[billiard]\nenergy = 3000.0\n[window]\nlevels = 150\n[classical]\nhits = 5000\ngrid_points = 64\n";

#[test]
fn minimal_config_fills_defaults_and_echoes() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), "seed = 3\n").unwrap();
    let o = wqc(&["classical-spectrum", "--config", "c.toml", "--out", "out"], d.path(), &[("WQC_CLASSICAL__HITS", "2000")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&d.path().join("out/resolved_config.json"));
    assert_eq!(r["config"]["billiard"]["lx"], 1.5);
    assert_eq!(r["config"]["classical"]["hits"], 2000);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["resolved"]["temperature"], 13618.0);
    assert_eq!(r["provenance"]["seed"], 3);
    let first = fs::read_to_string(d.path().join("out/collisions.csv")).unwrap();
    assert!(first.starts_with("# wqc "));
    assert!(first.contains(r["provenance"]["config_sha256"].as_str().unwrap()));
}

#[test]
fn negative_lx_names_the_field() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), "[billiard]\nlx = -1.0\n[window]\nlevels = -2\n").unwrap();
    let o = wqc(&["measures", "--config", "c.toml"], d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "config");
    let details: Vec<String> = e["details"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().into()).collect();
    assert!(details.iter().any(|m| m.starts_with("billiard.lx")), "{details:?}");
    assert!(details.iter().any(|m| m.starts_with("window.levels")), "{details:?}");
}

#[test]
fn unknown_key_is_a_schema_error() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.json"), r#"{"billiard": {"Lz": 1.0}}"#).unwrap();
    let o = wqc(&["measures", "--config", "c.json"], d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Lz"));
    let o = wqc(&["measures", "--config", "missing.toml"], d.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    // A window far below the ground state holds no levels.
    fs::write(d.path().join("c.toml"), "[window]\ncenter = 1.0\nlevels = 0.01\n").unwrap();
    let o = wqc(&["quantum-solve", "--config", "c.toml"], d.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["exit_code"], 3);
}

#[test]
fn same_seed_gives_identical_bodies() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), SMALL).unwrap();
    for out in ["a", "b"] {
        let o = wqc(&["classical-spectrum", "--config", "c.toml", "--out", out, "--seed", "11"], d.path(), &[]);
        assert!(o.status.success());
    }
    let o = wqc(&["classical-spectrum", "--config", "c.toml", "--out", "c", "--seed", "12"], d.path(), &[]);
    assert!(o.status.success());
    for f in ["collisions.csv", "spectrum.csv"] {
        let a = fs::read(d.path().join("a").join(f)).unwrap();
        let b = fs::read(d.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
        assert_ne!(body(&d.path().join("a").join(f)), body(&d.path().join("c").join(f)), "{f}");
    }
}

#[test]
fn classical_tail_matches_plateau() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), "[classical]\nhits = 100000\n").unwrap();
    let o = wqc(&["classical-spectrum", "--config", "c.toml", "--out", "o"], d.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&d.path().join("o/spectrum_summary.json"));
    let tail = s["tail_ratio"].as_f64().unwrap();
    assert!((tail - 1.0).abs() < 0.05, "{tail}");
    let t = read_csv(fs::File::open(d.path().join("o/spectrum.csv")).unwrap()).unwrap();
    assert_eq!(t.header, ["omega", "C", "C_over_C_inf"]);
    assert_eq!(t.rows.len(), 400);
}

#[test]
fn quantum_dumps_are_consistent() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), SMALL).unwrap();
    let o = wqc(&["quantum-solve", "--config", "c.toml", "--out", "o"], d.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = fs::read(d.path().join("o/fmatrix.bin")).unwrap();
    let m = decode_matrix(&bytes).unwrap();
    let side: MatrixSidecar = serde_json::from_value(json(&d.path().join("o/fmatrix.json"))).unwrap();
    assert_eq!((m.rows, m.cols), (side.rows, side.cols));
    assert_eq!(sha256_hex(&bytes[24..]), side.payload_sha256);
    for i in 0..m.rows {
        for j in 0..i {
            assert_eq!(m.data[i * m.cols + j], m.data[j * m.cols + i]);
        }
    }
    let ev = read_csv(fs::File::open(d.path().join("o/eigenvalues.csv")).unwrap()).unwrap();
    assert_eq!(ev.rows.len(), m.rows);
}

#[test]
fn measures_stats_and_ear_emit_reports() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), SMALL).unwrap();
    for cmd in ["measures", "stats", "ear"] {
        let o = wqc(&[cmd, "--config", "c.toml", "--out", "o"], d.path(), &[]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let m = json(&d.path().join("o/measure_report.json"));
    let r = &m["report"];
    let (gc, gs, g) = (r["g_c"].as_f64().unwrap(), r["g_s"].as_f64().unwrap(), r["g"].as_f64().unwrap());
    assert!((g - gc * gs).abs() < 1e-12 * g);
    let prof = read_csv(fs::File::open(d.path().join("o/bandprofile.csv")).unwrap()).unwrap();
    assert_eq!(prof.header, ["r", "omega", "mean", "median", "C_a", "C_s"]);
    let e = json(&d.path().join("o/ear_report.json"));
    let ear = &e["ear"];
    assert!(ear["G_slrt"].as_f64().unwrap() <= ear["G_lrt"].as_f64().unwrap());
    assert!(d.path().join("o/spacings.csv").exists());
    assert!(d.path().join("o/element_histogram.csv").exists());
}

#[test]
fn sweep_shows_rising_g() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("c.toml"), format!("{SMALL}[sweep]\nu = [0.08, 0.125, 0.2]\n")).unwrap();
    let o = wqc(&["sweep", "--config", "c.toml", "--out", "o", "--jobs", "3"], d.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_csv(fs::File::open(d.path().join("o/sweep.csv")).unwrap()).unwrap();
    let gi = t.column("g").unwrap();
    let g: Vec<f64> = t.rows.iter().map(|r| r[gi]).collect();
    assert!(g.windows(2).all(|w| w[1] > w[0]), "{g:?}");
    let s = json(&d.path().join("o/sweep_summary.json"));
    assert!(s["trends"][0]["slope_g_vs_u"].as_f64().unwrap() > 0.0);

    // Job count does not change the table.
    let o = wqc(&["sweep", "--config", "c.toml", "--out", "p", "--jobs", "1"], d.path(), &[]);
    assert!(o.status.success());
    assert_eq!(fs::read(d.path().join("o/sweep.csv")).unwrap(), fs::read(d.path().join("p/sweep.csv")).unwrap());
}
