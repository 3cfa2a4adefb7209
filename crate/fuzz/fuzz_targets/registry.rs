#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::corpus::parse_registry;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_registry(s, "fuzz");
    }
});
