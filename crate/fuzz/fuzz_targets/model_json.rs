#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::features::NUM_FEATURES;
use ticket_router::ltr::RankerModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = RankerModel::from_json(s) {
            let _ = m.score(&[0.5; NUM_FEATURES]);
        }
    }
});
