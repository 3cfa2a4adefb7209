#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::features::{NormalizationTable, NUM_FEATURES};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = NormalizationTable::from_json(s) {
            let _ = t.apply(&[0.5; NUM_FEATURES]);
        }
    }
});
