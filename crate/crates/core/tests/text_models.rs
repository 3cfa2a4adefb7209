use proptest::prelude::*;
use ticket_router::corpus::{Corpus, Ticket};
use ticket_router::text_models::{
    build_models, clarity, clarity_with, relevance_scores, similarity_scores, CollectionModel, EmbeddingProvider,
};

fn corpus() -> Corpus {
    let tickets = [
        ("a", "vpn tunnel down", vec![("vpn", 2), ("tunnel", 1)]),
        ("b", "vpn login", vec![("vpn", 1), ("login", 1)]),
        ("c", "ledger export fails", vec![("ledger", 2), ("export", 1)]),
        ("d", "ledger login", vec![("ledger", 1), ("login", 1)]),
    ];
    let lines: String = tickets
        .iter()
        .map(|(id, text, ents)| {
            let e: Vec<String> = ents.iter().map(|(n, c)| format!("[\"{n}\",{c}]")).collect();
            format!("{{\"id\":\"{id}\",\"text\":\"{text}\",\"entities\":[{}]}}\n", e.join(","))
        })
        .collect();
    let routing = "{\"ticket_id\":\"a\",\"sequence\":[\"NET.VPN\"]}\n{\"ticket_id\":\"b\",\"sequence\":[\"FIN.GL\",\"NET.VPN\"]}\n{\"ticket_id\":\"c\",\"sequence\":[\"FIN.GL\"]}\n{\"ticket_id\":\"d\",\"sequence\":[\"FIN.GL\"]}\n";
    Corpus::parse(&lines, routing, "NET.VPN\nFIN.GL\n").unwrap()
}

fn ticket(ents: &[(&str, u32)]) -> Ticket {
    let text = ents.iter().map(|e| e.0).collect::<Vec<_>>().join(" ");
    Ticket::new("q", text, ents.iter().map(|(e, c)| (e.to_string(), *c)).collect()).unwrap()
}

#[test]
fn collection_counts() {
    let c = corpus();
    let m = CollectionModel::build(c.tickets()).unwrap();
    assert_eq!((m.vocabulary_size(), m.num_tickets(), m.total_occurrences()), (5, 4, 10));
    let vpn = m.lookup("vpn").unwrap();
    assert_eq!((m.collection_frequency(vpn), m.document_frequency(vpn)), (3, 2));
    assert!((m.prob(vpn) - 4.0 / 15.0).abs() < 1e-12);
    assert!((m.prob_unseen() - 1.0 / 15.0).abs() < 1e-12);
    assert!((m.ief(vpn) - 2.0f64.ln()).abs() < 1e-12);
}

#[test]
fn clarity_vanishes_without_interpolation_weight() {
    let m = CollectionModel::build(corpus().tickets()).unwrap();
    let q = ticket(&[("vpn", 1), ("login", 3)]);
    assert!(clarity_with(&q, &m, 0.0).unwrap().abs() < 1e-12);
    assert!(clarity_with(&q, &m, 1.5).is_err());
    // a focused ticket is clearer than one that mirrors the collection
    let focused = ticket(&[("tunnel", 4)]);
    let broad = ticket(&[("vpn", 3), ("ledger", 3), ("login", 2), ("tunnel", 1), ("export", 1)]);
    assert!(clarity(&focused, &m).unwrap() > clarity(&broad, &m).unwrap());
}

#[test]
fn relevance_prefers_the_matching_group() {
    let c = corpus();
    let tm = build_models(&c, 4, 1).unwrap();
    let reg = c.registry();
    let (net, fin) = (reg.lookup("NET.VPN").unwrap(), reg.lookup("FIN.GL").unwrap());
    let q = ticket(&[("vpn", 1), ("tunnel", 1)]);
    let rn = relevance_scores(&q, net, &tm.profiles, &tm.collection).unwrap();
    let rf = relevance_scores(&q, fin, &tm.profiles, &tm.collection).unwrap();
    assert!(rn.qlm > rf.qlm && rn.bm25 > rf.bm25 && rn.sdm > rf.sdm && rn.log_p_group > rf.log_p_group);
    let s = similarity_scores(&q, net, &tm.embeddings, &tm.profiles, &tm.collection).unwrap();
    assert!((0.0..=1.0).contains(&s.cos_ent) && s.cos_ent > 0.0);
    assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s.cos_emb));
    assert!(s.emb_distance >= 0.0);
}

#[test]
fn embedding_text_errors() {
    assert!(EmbeddingProvider::parse("", "e").is_err());
    assert!(EmbeddingProvider::parse("a\n", "e").is_err());
    assert!(EmbeddingProvider::parse("a 1 2\nb 1\n", "e").is_err());
    assert!(EmbeddingProvider::parse("a 1 x\n", "e").is_err());
    assert!(EmbeddingProvider::parse("a 1\na 2\n", "e").is_err());
    assert!(EmbeddingProvider::parse("a NaN\n", "e").is_err());
    let p = EmbeddingProvider::parse("a 1 0\nb 0 2\n", "e").unwrap();
    assert_eq!(p.ticket_vector(&ticket(&[("a", 1), ("b", 1), ("zz", 5)])), vec![0.5, 1.0]);
    assert_eq!(p.ticket_vector(&ticket(&[("zz", 1)])), vec![0.0, 0.0]);
}

fn arb_ticket() -> impl Strategy<Value = Vec<(String, u32)>> {
    prop::collection::btree_map(
        prop::sample::select(vec!["vpn", "tunnel", "login", "ledger", "export", "new1", "new2"]),
        1u32..6,
        1..5,
    )
    .prop_map(|m| m.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

proptest! {
    #[test]
    fn clarity_is_non_negative_and_scale_free(ents in arb_ticket(), k in 2u32..5, lambda in 0.0f64..=1.0) {
        let m = CollectionModel::build(corpus().tickets()).unwrap();
        let t = Ticket::new("q", "", ents.clone()).unwrap();
        let scaled = Ticket::new("q", "", ents.iter().map(|(e, c)| (e.clone(), c * k)).collect()).unwrap();
        let a = clarity_with(&t, &m, lambda).unwrap();
        prop_assert!(a >= 0.0 && a.is_finite());
        prop_assert!((a - clarity_with(&scaled, &m, lambda).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn embedding_text_round_trip(rows in prop::collection::btree_map("[a-z]{1,5}", prop::collection::vec(-1e3f64..1e3, 3), 1..8)) {
        let p = EmbeddingProvider::from_vectors(3, rows.clone().into_iter().collect()).unwrap();
        let back = EmbeddingProvider::parse(&p.to_text(), "e").unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (name, v) in &rows {
            prop_assert_eq!(back.vector(name).unwrap(), v.as_slice());
        }
        prop_assert_eq!(back.to_text(), p.to_text());
    }
}
