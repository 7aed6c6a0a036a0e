#![no_main]

use libfuzzer_sys::fuzz_target;
use wqc_cli::config::{parse_config_str, Format};

// First byte picks the format; the rest is the document.
fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let format = if sel & 1 == 0 { Format::Toml } else { Format::Json };
    if let Ok(cfg) = parse_config_str(text, format) {
        // Anything accepted must also pass validation and derive parameters.
        assert!(cfg.violations().is_empty());
        let _ = cfg.params();
    }
});
