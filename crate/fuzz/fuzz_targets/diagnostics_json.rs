#![no_main]

use libfuzzer_sys::fuzz_target;
use maupertuis::io::{parse_diagnostics, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_diagnostics(text) {
        let _ = to_json(&doc);
    }
});
