use std::collections::HashMap;

use proptest::prelude::*;
use ticket_router::corpus::{GroupIdx, GroupRegistry, RoutingRecord, Ticket};
use ticket_router::features::TransitionModel;
use ticket_router::group_network::{build_networks, compute_priors};
use ticket_router::routing_sim::{
    human_reference, leave_one_out_hit_rate, madr_eval, phi, rank_step, simulate_episode, simulate_mstr_rr,
    AdversarialRouter, CandidatePools, OracleRouter, RandomRouter, Router, TerRouter, TerVariant,
};
use ticket_router::text_models::EmbeddingProvider;
use ticket_router::Result;

const GROUPS: [&str; 12] = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"];

fn registry() -> GroupRegistry {
    GroupRegistry::new(GROUPS).unwrap()
}

fn g(name: &str) -> GroupIdx {
    GroupIdx(GROUPS.iter().position(|x| *x == name).unwrap() as u32)
}

fn seq(s: &str) -> Vec<GroupIdx> {
    s.chars().map(|c| g(&c.to_string())).collect()
}

fn fixture(paths: &[&str]) -> (Vec<Ticket>, Vec<RoutingRecord>) {
    let tickets = (0..paths.len())
        .map(|i| Ticket::new(format!("t{i:02}"), "x", vec![("x".into(), 1)]).unwrap())
        .collect();
    let records = paths
        .iter()
        .enumerate()
        .map(|(i, p)| RoutingRecord::new(format!("t{i:02}"), seq(p)).unwrap())
        .collect();
    (tickets, records)
}

fn pairs<'a>(t: &'a [Ticket], r: &'a [RoutingRecord]) -> Vec<(&'a Ticket, &'a RoutingRecord)> {
    t.iter().zip(r).collect()
}

/// Fixed preference A > B > C > ... regardless of ticket and state.
struct Priority;

impl Router for Priority {
    fn name(&self) -> &str {
        "priority"
    }
    fn score(&self, _: &Ticket, _: &[GroupIdx], c: &[GroupIdx]) -> Result<Vec<f64>> {
        Ok(c.iter().map(|g| -(g.0 as f64)).collect())
    }
}

// Walk-through with A > B > C > D > E > F: a miss appends the next unvisited
// archived group, then the top recommendation once the archive is used up.
const HAND: [(&str, usize); 20] = [
    ("A", 1),
    ("B", 2),
    ("C", 3),
    ("F", 6),
    ("AB", 2),
    ("CB", 3),
    ("DEA", 1),
    ("EDC", 5),
    ("BC", 3),
    ("FE", 6),
    ("AF", 6),
    ("BA", 1),
    ("DCB", 4),
    ("E", 5),
    ("D", 4),
    ("CDEF", 6),
    ("ABC", 3),
    ("FD", 5),
    ("EB", 3),
    ("CED", 5),
];

#[test]
fn twenty_ticket_hand_simulation() {
    let paths: Vec<&str> = HAND.iter().map(|h| h.0).collect();
    let (t, r) = fixture(&paths);
    let reg = registry();
    let pools = CandidatePools::registry(&reg);
    let tests = pairs(&t, &r);
    let (m, eps) = simulate_mstr_rr(&Priority, &tests, &pools, &reg, 10).unwrap();
    for (e, (path, steps)) in eps.iter().zip(HAND) {
        assert!(e.resolved, "{path}");
        assert_eq!(e.steps, steps, "{path}");
    }
    assert!((m.mstr - 74.0 / 20.0).abs() < 1e-12);
    assert!((m.rr[0] - 3.0 / 20.0).abs() < 1e-12);
    assert_eq!(m.rr[5], 1.0);

    // cap 3: anything slower counts as 3
    let (m3, _) = simulate_mstr_rr(&Priority, &tests, &pools, &reg, 3).unwrap();
    assert!((m3.mstr - 52.0 / 20.0).abs() < 1e-12);
}

#[test]
fn hand_simulated_sequence_and_madr() {
    let (t, r) = fixture(&["EDC"]);
    let reg = registry();
    let pools = CandidatePools::registry(&reg);
    let e = simulate_episode(&Priority, &t[0], &r[0], pools.get("t00").unwrap(), &reg, 1, 10).unwrap();
    assert_eq!(e.simulated, seq("EDAB"));
    assert_eq!(e.visited(), seq("EDABC"));
    // E 1/4, D 1/2, A and B off path, C 1
    let m = madr_eval(&Priority, &pairs(&t, &r), &pools, &reg, 1, 10).unwrap();
    assert!((m - 1.75 / 5.0).abs() < 1e-12);
}

#[test]
fn phi_halving_example() {
    let truth = seq("ABC");
    let mean = (phi(g("B"), &truth) + phi(g("C"), &truth)) / 2.0;
    assert_eq!(phi(g("B"), &truth), 0.5);
    assert_eq!(mean, 0.75);
    assert_eq!(phi(g("F"), &truth), 0.0);
    // nearest occurrence counts
    assert_eq!(phi(g("A"), &seq("ABAC")), 0.5);
}

fn resolvers(r: &[RoutingRecord]) -> HashMap<String, GroupIdx> {
    r.iter().map(|x| (x.ticket_id.clone(), x.resolver())).collect()
}

#[test]
fn oracle_and_adversarial_bounds() {
    let paths: Vec<&str> = HAND.iter().map(|h| h.0).collect();
    let (t, r) = fixture(&paths);
    let reg = registry();
    let pools = CandidatePools::registry(&reg);
    let tests = pairs(&t, &r);
    let oracle = OracleRouter { resolvers: resolvers(&r) };
    let (m, _) = simulate_mstr_rr(&oracle, &tests, &pools, &reg, 10).unwrap();
    assert_eq!(m.mstr, 1.0);
    assert_eq!(m.rr[0], 1.0);
    assert_eq!(madr_eval(&oracle, &tests, &pools, &reg, 1, 10).unwrap(), 1.0);
    let hr = leave_one_out_hit_rate(&oracle, &tests, &pools, &reg, 6, 1).unwrap();
    assert_eq!(hr.hr, [1.0; 3]);

    let adv = AdversarialRouter { resolvers: resolvers(&r) };
    let (m, _) = simulate_mstr_rr(&adv, &tests, &pools, &reg, 10).unwrap();
    assert_eq!(m.mstr, 10.0);
    assert!(m.rr.iter().all(|&x| x == 0.0));
}

#[test]
fn human_reference_uses_archived_length() {
    let (t, r) = fixture(&["A", "AB", "ABC"]);
    let (m, madr) = human_reference(&pairs(&t, &r), 10).unwrap();
    assert_eq!(m.mstr, 2.0);
    assert_eq!(&m.rr[..3], &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
    let expect = (1.0 + 1.5 / 2.0 + 1.75 / 3.0) / 3.0;
    assert!((madr - expect).abs() < 1e-12);
}

#[test]
fn errors() {
    let reg = registry();
    let pools = CandidatePools::registry(&reg);
    assert!(simulate_mstr_rr(&Priority, &[], &pools, &reg, 10).is_err());
    let (t, r) = fixture(&["ABC"]);
    assert!(madr_eval(&Priority, &pairs(&t, &r), &pools, &reg, 0, 10).is_err());
    // pool must hold the archived groups
    assert!(leave_one_out_hit_rate(&Priority, &pairs(&t, &r), &pools, &reg, 2, 1).is_err());
    assert!(rank_step(&Priority, &t[0], &[], &[], &reg, 1).is_err());
}

#[test]
fn rank_step_truncation_and_ties() {
    let reg = registry();
    let (t, _) = fixture(&["A"]);
    assert_eq!(rank_step(&Priority, &t[0], &[], &[g("C")], &reg, 5).unwrap(), vec![g("C")]);
    let all = rank_step(&Priority, &t[0], &[], &seq("FDB"), &reg, 10).unwrap();
    assert_eq!(all, seq("BDF"));
    struct Flat;
    impl Router for Flat {
        fn name(&self) -> &str {
            "flat"
        }
        fn score(&self, _: &Ticket, _: &[GroupIdx], c: &[GroupIdx]) -> Result<Vec<f64>> {
            Ok(vec![0.0; c.len()])
        }
    }
    assert_eq!(rank_step(&Flat, &t[0], &[], &seq("ECA"), &reg, 2).unwrap(), seq("AC"));
}

#[test]
fn random_scorer_matches_uniform_baseline() {
    let names: Vec<String> = (0..60).map(|i| format!("R{}.G{i:02}", i % 4)).collect();
    let reg = GroupRegistry::new(names).unwrap();
    let tickets: Vec<Ticket> = (0..2500)
        .map(|i| Ticket::new(format!("q{i}"), "x", vec![("x".into(), 1)]).unwrap())
        .collect();
    let records: Vec<RoutingRecord> = (0..2500)
        .map(|i| RoutingRecord::new(format!("q{i}"), vec![GroupIdx((i * 7 % 60) as u32)]).unwrap())
        .collect();
    let pools = CandidatePools::registry(&reg);
    let hr = leave_one_out_hit_rate(&RandomRouter { seed: 5 }, &pairs(&tickets, &records), &pools, &reg, 50, 9).unwrap();
    assert_eq!(hr.trials, 2500);
    assert!((hr.hr[0] - 0.02).abs() <= 0.01, "{:?}", hr.hr);
}

fn ter_fixture() -> (GroupRegistry, Vec<RoutingRecord>) {
    // B -> C nine times, B -> D once; A -> E twice, A -> B once
    let mut paths = vec!["BC"; 9];
    paths.push("BD");
    paths.extend(["AE", "AE", "AB"]);
    let (_, r) = fixture(&paths);
    (registry(), r)
}

fn ter(variant: TerVariant, tm: &TransitionModel, emb: &EmbeddingProvider, pri: &ticket_router::group_network::GroupPriors) -> Vec<GroupIdx> {
    let r = TerRouter {
        variant,
        transitions: tm,
        embeddings: emb,
        priors: pri,
    };
    let t = Ticket::new("q", "x", vec![("x".into(), 1)]).unwrap();
    let reg = registry();
    let cands: Vec<GroupIdx> = reg.indices().filter(|g| ![GroupIdx(0), GroupIdx(1)].contains(g)).collect();
    rank_step(&r, &t, &seq("AB"), &cands, &reg, 1).unwrap()
}

#[test]
fn ter_variants_follow_dominant_edges() {
    let (reg, recs) = ter_fixture();
    let nets = build_networks(&recs, &reg).unwrap();
    let pri = compute_priors(&recs, &reg).unwrap();
    let tm = TransitionModel::build(&recs, &nets.transfer, &pri).unwrap();
    let mut emb = EmbeddingProvider::from_vectors(1, vec![("x".into(), vec![1.0])]).unwrap();
    emb.set_group_vectors([5.0, 0.0, 1.5, 0.9].into_iter().map(|x| vec![x]).chain(std::iter::repeat_n(vec![0.0], 8)).collect()).unwrap();
    let t = Ticket::new("q", "x", vec![("x".into(), 1)]).unwrap();
    let all: Vec<GroupIdx> = reg.indices().collect();
    for v in TerVariant::ALL {
        let r = TerRouter {
            variant: v,
            transitions: &tm,
            embeddings: &emb,
            priors: &pri,
        };
        let from_b: Vec<GroupIdx> = all.iter().copied().filter(|&x| x != g("B")).collect();
        assert_eq!(rank_step(&r, &t, &seq("B"), &from_b, &reg, 1).unwrap(), seq("C"), "{}", v.label());
        // step 0: nearest centroid to the ticket vector [1]; zero vectors never win
        assert_eq!(rank_step(&r, &t, &[], &all, &reg, 1).unwrap(), seq("D"), "{}", v.label());
    }
    // S = [A, B]: B -> C (0.9) beats A -> E (2/3); FM only looks at B
    assert_eq!(ter(TerVariant::Fms, &tm, &emb, &pri), seq("C"));
    assert_eq!(ter(TerVariant::Fm, &tm, &emb, &pri), seq("C"));
}

#[test]
fn ter_falls_back_to_resolver_prior() {
    let (reg, recs) = ter_fixture();
    let nets = build_networks(&recs, &reg).unwrap();
    let pri = compute_priors(&recs, &reg).unwrap();
    let tm = TransitionModel::build(&recs, &nets.transfer, &pri).unwrap();
    let emb = EmbeddingProvider::from_vectors(1, vec![("x".into(), vec![1.0])]).unwrap();
    let emb = {
        let mut e = emb;
        e.set_group_vectors(vec![vec![0.0]; GROUPS.len()]).unwrap();
        e
    };
    let t = Ticket::new("q", "x", vec![("x".into(), 1)]).unwrap();
    let r = TerRouter {
        variant: TerVariant::Fm,
        transitions: &tm,
        embeddings: &emb,
        priors: &pri,
    };
    // C has no out-edges, so the resolver prior decides: E resolved twice
    let cands: Vec<GroupIdx> = reg.indices().filter(|&x| x != g("C")).collect();
    assert_eq!(rank_step(&r, &t, &seq("C"), &cands, &reg, 1).unwrap(), seq("E"));
    // no centroid at all at step 0: resolver prior, C resolved nine times
    let all: Vec<GroupIdx> = reg.indices().collect();
    assert_eq!(rank_step(&r, &t, &[], &all, &reg, 1).unwrap(), seq("C"));
}

fn arb_paths() -> impl Strategy<Value = Vec<String>> {
    let path = prop::collection::vec(0usize..6, 1..6).prop_map(|v| {
        let last = GROUPS[*v.last().unwrap()].chars().next().unwrap();
        let mut s: Vec<char> = Vec::new();
        for i in &v[..v.len() - 1] {
            let c = GROUPS[*i].chars().next().unwrap();
            if c != last && s.last() != Some(&c) {
                s.push(c);
            }
        }
        s.push(last);
        s.into_iter().collect::<String>()
    });
    prop::collection::vec(path, 1..15)
}

proptest! {
    #[test]
    fn rr_curve_monotone_and_hit_rates_nested(paths in arb_paths(), seed in 0u64..1000) {
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        let (t, r) = fixture(&refs);
        let reg = registry();
        let pools = CandidatePools::registry(&reg);
        let tests = pairs(&t, &r);
        let router = RandomRouter { seed };
        let (m, _) = simulate_mstr_rr(&router, &tests, &pools, &reg, 10).unwrap();
        prop_assert!(m.rr.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((1.0..=10.0).contains(&m.mstr));
        let hr = leave_one_out_hit_rate(&router, &tests, &pools, &reg, 6, seed).unwrap();
        prop_assert!(hr.hr[0] <= hr.hr[1] && hr.hr[1] <= hr.hr[2]);
    }

    #[test]
    fn simulation_is_deterministic(paths in arb_paths(), seed in 0u64..1000) {
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        let (t, r) = fixture(&refs);
        let reg = registry();
        let pools = CandidatePools::registry(&reg);
        let tests = pairs(&t, &r);
        let router = RandomRouter { seed };
        let a = simulate_mstr_rr(&router, &tests, &pools, &reg, 10).unwrap();
        let b = simulate_mstr_rr(&router, &tests, &pools, &reg, 10).unwrap();
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(
            madr_eval(&router, &tests, &pools, &reg, 3, 10).unwrap(),
            madr_eval(&router, &tests, &pools, &reg, 3, 10).unwrap()
        );
    }

    #[test]
    fn oracle_is_an_upper_bound(paths in arb_paths()) {
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        let (t, r) = fixture(&refs);
        let reg = registry();
        let pools = CandidatePools::registry(&reg);
        let tests = pairs(&t, &r);
        let oracle = OracleRouter { resolvers: resolvers(&r) };
        let (m, _) = simulate_mstr_rr(&oracle, &tests, &pools, &reg, 10).unwrap();
        let (p, _) = simulate_mstr_rr(&Priority, &tests, &pools, &reg, 10).unwrap();
        prop_assert_eq!(m.mstr, 1.0);
        prop_assert!(p.mstr >= m.mstr);
        prop_assert_eq!(madr_eval(&oracle, &tests, &pools, &reg, 1, 10).unwrap(), 1.0);
    }
}

#[test]
fn madr_grows_with_k_on_the_fixture() {
    let paths: Vec<&str> = HAND.iter().map(|h| h.0).collect();
    let (t, r) = fixture(&paths);
    let reg = registry();
    let pools = CandidatePools::registry(&reg);
    let tests = pairs(&t, &r);
    for router in [&Priority as &dyn Router, &RandomRouter { seed: 3 }] {
        let m: Vec<f64> = (1..=6).map(|k| madr_eval(router, &tests, &pools, &reg, k, 10).unwrap()).collect();
        assert!(m.windows(2).all(|w| w[1] >= w[0]), "{m:?}");
    }
    // every resolver is within A..F
    assert_eq!(madr_eval(&Priority, &tests, &pools, &reg, 6, 10).unwrap(), 1.0);
}
