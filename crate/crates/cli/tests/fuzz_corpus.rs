//! Replays the fuzz corpus seeds through the parser entry points with the
//! same properties the fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use wqc_cli::config::{parse_config_str, Format};
use wqc_cli::io::{collisions_from_table, decode_matrix, encode_matrix, read_csv};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("config") {
        let (&sel, rest) = data.split_first().unwrap();
        let format = if sel & 1 == 0 { Format::Toml } else { Format::Json };
        match parse_config_str(std::str::from_utf8(rest).unwrap(), format) {
            Ok(cfg) => {
                assert!(cfg.violations().is_empty(), "{name}");
                accepted += 1;
            }
            Err(e) => assert!(name.contains("invalid") || name.contains("unknown"), "{name}: {e}"),
        }
    }
    assert_eq!(accepted, 3);
}

#[test]
fn csv_and_collision_seeds() {
    for (name, data) in seeds("csv_table") {
        match read_csv(data.as_slice()) {
            Ok(t) => assert!(t.rows.iter().all(|r| r.len() == t.header.len()), "{name}"),
            Err(_) => assert_eq!(name, "ragged"),
        }
    }
    for (name, data) in seeds("collisions") {
        let c = collisions_from_table(&read_csv(data.as_slice()).unwrap());
        match name.as_str() {
            "ordered" => assert_eq!(c.unwrap().len(), 3),
            "permuted_columns" => assert_eq!(c.unwrap()[0].t, 0.5),
            _ => assert!(c.is_err(), "{name}"),
        }
    }
}

#[test]
fn matrix_seeds() {
    for (name, data) in seeds("matrix_decode") {
        match decode_matrix(&data) {
            Ok(m) => {
                assert_eq!(m.data.len(), m.rows * m.cols);
                assert_eq!(encode_matrix(&m).unwrap(), data, "{name}");
            }
            Err(_) => assert!(name == "truncated" || name == "overflow_dims", "{name}"),
        }
    }
}
