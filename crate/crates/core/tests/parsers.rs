use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use ticket_router::corpus::{parse_registry, parse_routing, parse_tickets};
use ticket_router::features::{NormalizationTable, NUM_FEATURES};
use ticket_router::group_network::{NetworkKind, RoutingNetwork};
use ticket_router::ltr::RankerModel;
use ticket_router::pipeline::PipelineConfig;
use ticket_router::text_models::EmbeddingProvider;

const TARGETS: [&str; 8] = [
    "tickets",
    "routing",
    "registry",
    "embeddings",
    "edge_list",
    "config_json",
    "model_json",
    "normalization_json",
];

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().map(|p| fs::read_to_string(p).unwrap()).collect()
}

fn feed(target: &str, s: &str) {
    match target {
        "tickets" => drop(parse_tickets(s, "p")),
        "routing" => drop(parse_routing(s, "p")),
        "registry" => drop(parse_registry(s, "p")),
        "embeddings" => {
            if let Ok(p) = EmbeddingProvider::parse(s, "p") {
                assert_eq!(EmbeddingProvider::parse(&p.to_text(), "p").unwrap().to_text(), p.to_text());
            }
        }
        "edge_list" => {
            if let Ok(n) = RoutingNetwork::from_edge_list(NetworkKind::Transfer, Vec::new(), s, "p") {
                let text = n.to_edge_list();
                let back = RoutingNetwork::from_edge_list(NetworkKind::Transfer, n.labels().to_vec(), &text, "p");
                assert_eq!(back.unwrap().to_edge_list(), text);
            }
        }
        "config_json" => {
            if let Ok(c) = PipelineConfig::from_json(s) {
                let _ = c.validate();
            }
        }
        "model_json" => {
            if let Ok(m) = RankerModel::from_json(s) {
                for v in [0.0, 0.5, 1.0] {
                    let _ = m.score(&[v; NUM_FEATURES]);
                }
            }
        }
        "normalization_json" => {
            if let Ok(t) = NormalizationTable::from_json(s) {
                let _ = t.apply(&[0.5; NUM_FEATURES]);
            }
        }
        _ => unreachable!(),
    }
}

#[test]
fn seeds_parse() {
    for t in TARGETS {
        let s = seeds(t);
        assert!(!s.is_empty(), "{t}");
        for seed in &s {
            feed(t, seed);
        }
    }
    assert!(parse_tickets(&seeds("tickets")[0], "p").is_ok());
    assert!(RankerModel::from_json(&seeds("model_json")[0]).is_ok());
    assert!(NormalizationTable::from_json(&seeds("normalization_json")[0]).is_ok());
}

#[derive(Clone, Debug)]
enum Edit {
    Flip(usize, u8),
    Cut(usize, usize),
    Insert(usize, &'static str),
    Number(usize, &'static str),
}

fn arb_edit() -> impl Strategy<Value = Edit> {
    let token = prop::sample::select(vec![
        "-1", "0", "1e308", "NaN", "99999999999", "-0", "[]", "{}", "null", "\"\"", ",", "\n", " ", "\"x\"", "]",
    ]);
    prop_oneof![
        (any::<usize>(), any::<u8>()).prop_map(|(i, b)| Edit::Flip(i, b)),
        (any::<usize>(), 1usize..40).prop_map(|(i, n)| Edit::Cut(i, n)),
        (any::<usize>(), token.clone()).prop_map(|(i, t)| Edit::Insert(i, t)),
        (any::<usize>(), token).prop_map(|(i, t)| Edit::Number(i, t)),
    ]
}

fn apply(seed: &str, edits: &[Edit]) -> String {
    let mut b = seed.as_bytes().to_vec();
    for e in edits {
        let n = b.len().max(1);
        match *e {
            Edit::Flip(i, x) if !b.is_empty() => b[i % n] ^= x,
            Edit::Cut(i, k) if !b.is_empty() => {
                let s = i % n;
                b.drain(s..(s + k).min(b.len()));
            }
            Edit::Insert(i, t) => {
                let s = i % (b.len() + 1);
                b.splice(s..s, t.bytes());
            }
            Edit::Number(i, t) => {
                let digits: Vec<usize> = (0..b.len()).filter(|&j| b[j].is_ascii_digit()).collect();
                if let Some(&start) = digits.get(i % digits.len().max(1)) {
                    let end = (start..b.len()).find(|&j| !b[j].is_ascii_digit() && b[j] != b'.').unwrap_or(b.len());
                    b.splice(start..end, t.bytes());
                }
            }
            _ => {}
        }
    }
    String::from_utf8_lossy(&b).into_owned()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn mutated_inputs_never_panic(target in prop::sample::select(TARGETS.to_vec()), pick in any::<usize>(), edits in prop::collection::vec(arb_edit(), 1..6)) {
        let s = seeds(target);
        feed(target, &apply(&s[pick % s.len()], &edits));
    }

    #[test]
    fn arbitrary_text_never_panics(target in prop::sample::select(TARGETS.to_vec()), text in "\\PC{0,200}") {
        feed(target, &text);
    }
}
