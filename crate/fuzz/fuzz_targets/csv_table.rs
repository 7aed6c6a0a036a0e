#![no_main]

use libfuzzer_sys::fuzz_target;
use wqc_cli::io::read_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = read_csv(data) {
        assert!(t.rows.iter().all(|r| r.len() == t.header.len()));
    }
});
