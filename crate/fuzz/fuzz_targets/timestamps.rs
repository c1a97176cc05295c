#![no_main]

use libfuzzer_sys::fuzz_target;
use qdtrap::io::{format_split_timestamps, format_timestamps, parse_timestamps, TimestampData};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(parsed) = parse_timestamps(text) else { return };
    // whatever parses must survive a format/parse round trip
    let again = match &parsed {
        TimestampData::Single(s) => format_timestamps(s),
        TimestampData::Split { a, b } => format_split_timestamps(a, b),
    };
    assert_eq!(parse_timestamps(&again).unwrap(), parsed);
});
