#![no_main]

use libfuzzer_sys::fuzz_target;
use wqc_cli::io::{decode_matrix, encode_matrix};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = decode_matrix(data) {
        assert_eq!(m.data.len(), m.rows * m.cols);
        // Decoding is lossless: re-encoding reproduces the input bit for bit.
        assert_eq!(encode_matrix(&m).unwrap(), data);
    }
});
