#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtrap::io::{format_histogram_csv, parse_histogram_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = parse_histogram_csv(text) {
        assert_eq!(parse_histogram_csv(&format_histogram_csv(&h)).unwrap(), h);
    }
});
