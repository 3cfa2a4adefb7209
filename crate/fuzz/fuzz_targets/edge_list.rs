#![no_main]

use libfuzzer_sys::fuzz_target;
use ticket_router::group_network::{NetworkKind, RoutingNetwork};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(n) = RoutingNetwork::from_edge_list(NetworkKind::Transfer, Vec::new(), s, "fuzz") {
            let text = n.to_edge_list();
            let back = RoutingNetwork::from_edge_list(NetworkKind::Transfer, n.labels().to_vec(), &text, "fuzz")
                .expect("re-parse");
            assert_eq!(back.to_edge_list(), text);
        }
    }
});
