#![no_main]

use blowup_forge::io::{format_csv, parse_csv, PROFILE_HEADER};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_csv(text, PROFILE_HEADER) {
        // Formatting is a fixed point after one parse.
        let once = format_csv(PROFILE_HEADER, &rows);
        let back = parse_csv(&once, PROFILE_HEADER).expect("formatted rows parse");
        assert_eq!(format_csv(PROFILE_HEADER, &back), once);
    }
});
