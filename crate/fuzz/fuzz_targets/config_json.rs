#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::pipeline::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = PipelineConfig::from_json(s) {
            let _ = c.validate();
        }
    }
});
