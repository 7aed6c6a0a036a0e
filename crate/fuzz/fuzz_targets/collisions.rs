#![no_main]

use libfuzzer_sys::fuzz_target;
use wqc_cli::io::{collisions_from_table, read_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(t) = read_csv(data) else { return };
    if let Ok(c) = collisions_from_table(&t) {
        assert!(c.windows(2).all(|w| w[1].t > w[0].t));
    }
});
