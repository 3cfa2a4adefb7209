#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::text_models::EmbeddingProvider;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(p) = EmbeddingProvider::parse(s, "fuzz") {
            let back = EmbeddingProvider::parse(&p.to_text(), "fuzz").expect("re-parse");
            assert_eq!(back.to_text(), p.to_text());
        }
    }
});
