use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Corpus, Ticket};
use crate::error::{Error, Result};

/// Number of retrieved tickets that vote on the root.
pub const VOTE_DEPTH: usize = 100;

/// Inverted index over training-ticket entities with TF-IDF weights.
#[derive(Clone, Debug)]
pub struct TicketIndex {
    ticket_ids: Vec<String>,
    /// resolver root of each indexed ticket
    roots: Vec<String>,
    /// entity -> postings (ticket position, weight), ascending position
    postings: HashMap<String, Vec<(u32, f64)>>,
    /// raw counts kept alongside weights for inspection
    counts: HashMap<String, Vec<(u32, u32)>>,
    norms: Vec<f64>,
    fallback_root: String,
}

fn tf(count: u32) -> f64 {
    1.0 + (count as f64).ln()
}

impl TicketIndex {
    /// Indexes every routed ticket of the corpus, in ticket order.
    pub fn build(corpus: &Corpus) -> Result<Self> {
        let registry = corpus.registry();
        let routed: Vec<_> = corpus.routed().collect();
        if routed.is_empty() {
            return Err(Error::Empty("no routed tickets to index".into()));
        }
        let mut counts: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        let mut ticket_ids = Vec::with_capacity(routed.len());
        let mut roots = Vec::with_capacity(routed.len());
        for (i, (t, r)) in routed.iter().enumerate() {
            ticket_ids.push(t.id.clone());
            roots.push(registry.root_of(r.resolver()).to_string());
            for (e, c) in &t.entities {
                counts.entry(e.clone()).or_default().push((i as u32, *c));
            }
        }
        let n = routed.len() as f64;
        let mut postings = HashMap::with_capacity(counts.len());
        for (e, list) in &counts {
            let idf = (1.0 + n / list.len() as f64).ln();
            postings.insert(e.clone(), list.iter().map(|&(d, c)| (d, tf(c) * idf)).collect());
        }
        let tickets: Vec<&Ticket> = routed.iter().map(|p| p.0).collect();
        let norms = ticket_norms(&tickets, &postings);
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &roots {
            *freq.entry(r.as_str()).or_default() += 1;
        }
        let fallback_root = freq
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(r, _)| r.to_string())
            .unwrap();
        Ok(TicketIndex {
            ticket_ids,
            roots,
            postings,
            counts,
            norms,
            fallback_root,
        })
    }

    pub fn len(&self) -> usize {
        self.ticket_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticket_ids.is_empty()
    }

    /// Raw postings (ticket id, count) of an entity.
    pub fn postings(&self, entity: &str) -> Vec<(&str, u32)> {
        self.counts
            .get(entity)
            .map(|l| l.iter().map(|&(d, c)| (self.ticket_ids[d as usize].as_str(), c)).collect())
            .unwrap_or_default()
    }

    pub fn fallback_root(&self) -> &str {
        &self.fallback_root
    }

    fn query_weights(&self, ticket: &Ticket) -> Vec<(&Vec<(u32, f64)>, f64)> {
        let n = self.len() as f64;
        let mut q: Vec<(&str, u32)> = ticket.entities.iter().map(|(e, c)| (e.as_str(), *c)).collect();
        q.sort_unstable();
        q.into_iter()
            .filter_map(|(e, c)| {
                self.postings.get(e).map(|ps| {
                    let idf = (1.0 + n / ps.len() as f64).ln();
                    (ps, tf(c) * idf)
                })
            })
            .collect()
    }

    /// Top `k` indexed tickets by cosine similarity, ties by ticket order.
    pub fn search(&self, ticket: &Ticket, k: usize) -> Vec<(&str, f64)> {
        self.search_positions(ticket, k)
            .into_iter()
            .map(|(d, s)| (self.ticket_ids[d as usize].as_str(), s))
            .collect()
    }

    fn search_positions(&self, ticket: &Ticket, k: usize) -> Vec<(u32, f64)> {
        let q = self.query_weights(ticket);
        let qn = q.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if qn == 0.0 {
            return Vec::new();
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for (ps, qw) in &q {
            for &(d, w) in *ps {
                *acc.entry(d).or_insert(0.0) += qw * w;
            }
        }
        let mut hits: Vec<(u32, f64)> = acc
            .into_iter()
            .map(|(d, dot)| (d, dot / (qn * self.norms[d as usize])))
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.truncate(k);
        hits
    }

    /// Majority resolver root among the top retrieved tickets.
    pub fn predict_root(&self, ticket: &Ticket) -> String {
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for (d, _) in self.search_positions(ticket, VOTE_DEPTH) {
            *votes.entry(self.roots[d as usize].as_str()).or_default() += 1;
        }
        votes
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
            .map_or_else(|| self.fallback_root.clone(), |(r, _)| r.to_string())
    }
}

fn ticket_norms(tickets: &[&Ticket], postings: &HashMap<String, Vec<(u32, f64)>>) -> Vec<f64> {
    let mut norms = vec![0.0; tickets.len()];
    for (i, t) in tickets.iter().enumerate() {
        let mut ents: Vec<&str> = t.entities.iter().map(|(e, _)| e.as_str()).collect();
        ents.sort_unstable();
        let mut s = 0.0;
        for e in ents {
            let ps = &postings[e];
            let j = ps.binary_search_by_key(&(i as u32), |p| p.0).expect("posting present");
            s += ps[j].1 * ps[j].1;
        }
        norms[i] = s.sqrt();
    }
    norms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[(&str, &[(&str, u32)], &str)]) -> Corpus {
        let mut tickets = String::new();
        let mut routing = String::new();
        let mut groups: Vec<&str> = Vec::new();
        for (id, ents, g) in lines {
            let e: Vec<String> = ents.iter().map(|(e, c)| format!("[\"{e}\",{c}]")).collect();
            tickets += &format!("{{\"id\":\"{id}\",\"entities\":[{}]}}\n", e.join(","));
            routing += &format!("{{\"ticket_id\":\"{id}\",\"sequence\":[\"{g}\"]}}\n");
            if !groups.contains(g) {
                groups.push(g);
            }
        }
        Corpus::parse(&tickets, &routing, &groups.join("\n")).unwrap()
    }

    #[test]
    fn postings_match_hand_lists() {
        let c = corpus(&[
            ("t1", &[("a", 2), ("b", 1)], "AC.X"),
            ("t2", &[("b", 3)], "PM.Y"),
            ("t3", &[("a", 1), ("c", 1)], "AC.X"),
        ]);
        let idx = TicketIndex::build(&c).unwrap();
        assert_eq!(idx.postings("a"), vec![("t1", 2), ("t3", 1)]);
        assert_eq!(idx.postings("b"), vec![("t1", 1), ("t2", 3)]);
        assert_eq!(idx.postings("c"), vec![("t3", 1)]);
        assert!(idx.postings("z").is_empty());
        for t in c.tickets() {
            assert_eq!(idx.search(t, 1)[0].0, t.id);
        }
    }

    #[test]
    fn vote_majority_and_fallback() {
        let c = corpus(&[
            ("t1", &[("a", 1)], "AC.X"),
            ("t2", &[("a", 1)], "AC.Y"),
            ("t3", &[("a", 1)], "PM.Y"),
            ("t4", &[("b", 1)], "PM.Y"),
            ("t5", &[("c", 1)], "PM.Z"),
        ]);
        let idx = TicketIndex::build(&c).unwrap();
        let q = Ticket::new("q", "", vec![("a".into(), 1)]).unwrap();
        assert_eq!(idx.predict_root(&q), "AC");
        let unk = Ticket::new("u", "", vec![("zz".into(), 1)]).unwrap();
        assert_eq!(idx.fallback_root(), "PM");
        assert_eq!(idx.predict_root(&unk), "PM");
    }

    #[test]
    fn tie_breaks_lexicographically() {
        let c = corpus(&[("t1", &[("a", 1)], "PM.X"), ("t2", &[("a", 1)], "AC.Y")]);
        let idx = TicketIndex::build(&c).unwrap();
        let q = Ticket::new("q", "", vec![("a".into(), 1)]).unwrap();
        assert_eq!(idx.predict_root(&q), "AC");
        assert_eq!(idx.fallback_root(), "AC");
    }
}
