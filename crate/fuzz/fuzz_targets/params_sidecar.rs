#![no_main]

use blowup_forge::io::{format_sidecar, parse_sidecar};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(params) = parse_sidecar(text) {
        let again = parse_sidecar(&format_sidecar(&params)).expect("sidecar re-parses");
        assert_eq!(again.n_profile, params.n_profile);
        assert_eq!(again.p.to_bits(), params.p.to_bits());
    }
});
