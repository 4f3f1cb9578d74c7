#![no_main]

use blowup_forge::cli::{parse_config, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_config(text) {
        if let Ok(cfg) = RunConfig::from_map(&map) {
            assert!(cfg.params.p > 5.0);
            assert!(cfg.params.validate().is_ok());
        }
    }
});
