use std::collections::HashMap;

use crate::corpus::Ticket;
use crate::error::{Error, Result};

/// Interpolation weight of the ticket's own distribution in clarity scoring.
pub const CLARITY_LAMBDA: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityIdx(pub u32);

impl EntityIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A ticket encoded against a collection vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    /// In-vocabulary entities with counts, in listing order.
    pub known: Vec<(EntityIdx, u32)>,
    /// Counts of entities the collection has never seen.
    pub oov: Vec<u32>,
    /// Entity token sequence; `None` marks an unseen entity.
    pub sequence: Vec<Option<EntityIdx>>,
    /// Distinct entities in first-occurrence order.
    pub terms: Vec<Option<EntityIdx>>,
    pub length: usize,
}

impl Query {
    pub fn occurrences(&self) -> u64 {
        self.known.iter().map(|&(_, c)| c as u64).sum::<u64>() + self.oov.iter().map(|&c| c as u64).sum::<u64>()
    }

    pub fn count(&self, e: EntityIdx) -> u32 {
        self.known.iter().find(|(k, _)| *k == e).map_or(0, |&(_, c)| c)
    }
}

/// Add-one smoothed collection entity distribution plus inverse entity frequencies.
#[derive(Clone, Debug)]
pub struct CollectionModel {
    names: Vec<String>,
    index: HashMap<String, EntityIdx>,
    cf: Vec<u64>,
    df: Vec<u32>,
    total: u64,
    docs: usize,
}

impl CollectionModel {
    pub fn build(tickets: &[Ticket]) -> Result<Self> {
        if tickets.is_empty() {
            return Err(Error::Empty("collection has no tickets".into()));
        }
        let mut model = CollectionModel {
            names: Vec::new(),
            index: HashMap::new(),
            cf: Vec::new(),
            df: Vec::new(),
            total: 0,
            docs: tickets.len(),
        };
        for t in tickets {
            for (name, count) in &t.entities {
                let idx = match model.index.get(name) {
                    Some(&i) => i,
                    None => {
                        let i = EntityIdx(model.names.len() as u32);
                        model.names.push(name.clone());
                        model.index.insert(name.clone(), i);
                        model.cf.push(0);
                        model.df.push(0);
                        i
                    }
                };
                model.cf[idx.index()] += *count as u64;
                model.df[idx.index()] += 1;
                model.total += *count as u64;
            }
        }
        Ok(model)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.names.len()
    }

    pub fn num_tickets(&self) -> usize {
        self.docs
    }

    pub fn total_occurrences(&self) -> u64 {
        self.total
    }

    pub fn lookup(&self, name: &str) -> Option<EntityIdx> {
        self.index.get(name).copied()
    }

    pub fn name(&self, e: EntityIdx) -> &str {
        &self.names[e.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn collection_frequency(&self, e: EntityIdx) -> u64 {
        self.cf[e.index()]
    }

    pub fn document_frequency(&self, e: EntityIdx) -> u32 {
        self.df[e.index()]
    }

    fn denominator(&self) -> f64 {
        (self.total + self.names.len() as u64) as f64
    }

    /// P(e|C) = (cf(e) + 1) / (N + V).
    pub fn prob(&self, e: EntityIdx) -> f64 {
        (self.cf[e.index()] + 1) as f64 / self.denominator()
    }

    /// Smoothed mass given to an entity outside the vocabulary.
    pub fn prob_unseen(&self) -> f64 {
        1.0 / self.denominator()
    }

    /// ln(|C| / df(e)).
    pub fn ief(&self, e: EntityIdx) -> f64 {
        (self.docs as f64 / self.df[e.index()].max(1) as f64).ln()
    }

    /// IEF of an entity no collection ticket contains (df floored at 1).
    pub fn ief_unseen(&self) -> f64 {
        (self.docs as f64).ln()
    }

    pub fn encode(&self, ticket: &Ticket) -> Query {
        let mut known = Vec::with_capacity(ticket.entities.len());
        let mut oov = Vec::new();
        for (name, count) in &ticket.entities {
            match self.lookup(name) {
                Some(e) => known.push((e, *count)),
                None => oov.push(*count),
            }
        }
        let sequence: Vec<Option<EntityIdx>> = ticket.entity_sequence().into_iter().map(|n| self.lookup(n)).collect();
        let mut seen_names = std::collections::HashSet::new();
        let terms = ticket
            .entity_sequence()
            .into_iter()
            .filter(|n| seen_names.insert(*n))
            .map(|n| self.lookup(n))
            .collect();
        Query {
            known,
            oov,
            sequence,
            terms,
            length: ticket.length,
        }
    }
}

/// Technical clarity of a ticket in bits, with the default interpolation.
pub fn clarity(ticket: &Ticket, model: &CollectionModel) -> Result<f64> {
    clarity_with(ticket, model, CLARITY_LAMBDA)
}

/// KL divergence (bits) of the ticket's Jelinek-Mercer smoothed entity
/// distribution from the collection distribution.
///
/// The support is the collection vocabulary plus the ticket's unseen
/// entities; the collection side is renormalized over that support.
pub fn clarity_with(ticket: &Ticket, model: &CollectionModel, lambda: f64) -> Result<f64> {
    if ticket.entities.is_empty() {
        return Err(Error::Validation(format!("ticket `{}` has no entities", ticket.id)));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("clarity lambda {lambda} outside [0, 1]")));
    }
    let q = model.encode(ticket);
    let total = q.occurrences() as f64;
    let z = 1.0 + q.oov.len() as f64 * model.prob_unseen();
    let term = |ml: f64, pc: f64| {
        let pc = pc / z;
        let p = lambda * ml + (1.0 - lambda) * pc;
        if p > 0.0 {
            p * (p / pc).log2()
        } else {
            0.0
        }
    };
    let mut sum = 0.0;
    let mut covered = 0.0;
    for &(e, c) in &q.known {
        let pc = model.prob(e);
        covered += pc;
        sum += term(c as f64 / total, pc);
    }
    for &c in &q.oov {
        sum += term(c as f64 / total, model.prob_unseen());
    }
    // Vocabulary entities absent from the ticket all share the ratio (1 - lambda).
    let rest = ((1.0 - covered) / z).max(0.0);
    if lambda < 1.0 && rest > 0.0 {
        sum += (1.0 - lambda) * rest * (1.0 - lambda).log2();
    }
    Ok(sum.max(0.0))
}

/// The five raw ticket features: length, clarity, entity occurrences,
/// occurrences per token, summed IEF of distinct entities.
pub fn ticket_block(ticket: &Ticket, model: &CollectionModel) -> Result<[f64; 5]> {
    let occurrences = ticket.entity_occurrences() as f64;
    let length = ticket.length as f64;
    let ief: f64 = ticket
        .entities
        .iter()
        .map(|(n, _)| model.lookup(n).map_or_else(|| model.ief_unseen(), |e| model.ief(e)))
        .sum();
    Ok([
        length,
        clarity(ticket, model)?,
        occurrences,
        if length > 0.0 { occurrences / length } else { 0.0 },
        ief,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ticket(id: &str, text: &str, ents: &[(&str, u32)]) -> Ticket {
        Ticket::new(id, text, ents.iter().map(|(e, c)| (e.to_string(), *c)).collect()).unwrap()
    }

    /// Direct KL summation over an explicit support, independent of the
    /// closed-form tail used by `clarity_with`.
    fn brute_clarity(t: &Ticket, m: &CollectionModel, lambda: f64) -> f64 {
        let total = t.entity_occurrences() as f64;
        let mut support: Vec<(f64, f64)> = m
            .names()
            .iter()
            .map(|n| {
                let e = m.lookup(n).unwrap();
                let c = t.entities.iter().find(|(x, _)| x == n).map_or(0, |(_, c)| *c);
                (c as f64 / total, m.prob(e))
            })
            .collect();
        for (n, c) in &t.entities {
            if m.lookup(n).is_none() {
                support.push((*c as f64 / total, m.prob_unseen()));
            }
        }
        let z: f64 = support.iter().map(|(_, q)| q).sum();
        support
            .iter()
            .map(|&(ml, q)| {
                let q = q / z;
                let p = lambda * ml + (1.0 - lambda) * q;
                if p == 0.0 { 0.0 } else { p * (p / q).log2() }
            })
            .sum()
    }

    #[test]
    fn add_one_collection_probs() {
        // 5-ticket toy: cf a=4, b=3, c=1, d=2 -> N=10, V=4
        let ts = vec![
            ticket("1", "", &[("a", 2), ("b", 1)]),
            ticket("2", "", &[("a", 1)]),
            ticket("3", "", &[("b", 2), ("c", 1)]),
            ticket("4", "", &[("d", 2)]),
            ticket("5", "", &[("a", 1)]),
        ];
        let m = CollectionModel::build(&ts).unwrap();
        let p = |n: &str| m.prob(m.lookup(n).unwrap());
        assert!((p("a") - 5.0 / 14.0).abs() < 1e-15);
        assert!((p("b") - 4.0 / 14.0).abs() < 1e-15);
        assert!((p("c") - 2.0 / 14.0).abs() < 1e-15);
        assert!((p("d") - 3.0 / 14.0).abs() < 1e-15);
        let s: f64 = m.names().iter().map(|n| p(n)).sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!((m.ief(m.lookup("a").unwrap()) - (5.0f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(m.ief(m.lookup("d").unwrap()), 5.0f64.ln());
    }

    #[test]
    fn single_ticket_collection_is_its_smoothed_distribution() {
        let t = ticket("1", "", &[("a", 3), ("b", 1)]);
        let m = CollectionModel::build(std::slice::from_ref(&t)).unwrap();
        assert!((m.prob(m.lookup("a").unwrap()) - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.prob(m.lookup("b").unwrap()) - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn clarity_zero_when_distributions_match() {
        // P(a|C) = 4/6, P(b|C) = 2/6; ticket ML = (2/3, 1/3).
        let m = CollectionModel::build(&[ticket("1", "", &[("a", 3), ("b", 1)])]).unwrap();
        let t = ticket("q", "", &[("a", 2), ("b", 1)]);
        assert!(clarity(&t, &m).unwrap().abs() < 1e-9);
    }

    #[test]
    fn clarity_single_entity_closed_form() {
        // cf a=1, b=2, c=2 -> P(a|C) = 2/8 = 0.25
        let m = CollectionModel::build(&[
            ticket("1", "", &[("a", 1), ("b", 2)]),
            ticket("2", "", &[("c", 2)]),
        ])
        .unwrap();
        let t = ticket("q", "", &[("a", 1)]);
        assert!((clarity_with(&t, &m, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clarity_matches_direct_summation() {
        let m = CollectionModel::build(&[
            ticket("1", "", &[("a", 3), ("b", 1)]),
            ticket("2", "", &[("c", 1), ("d", 4)]),
        ])
        .unwrap();
        let t = ticket("q", "", &[("a", 1), ("c", 2), ("zz", 1)]);
        for lambda in [0.0, 0.3, 0.6, 1.0] {
            let fast = clarity_with(&t, &m, lambda).unwrap();
            let slow = brute_clarity(&t, &m, lambda);
            assert!((fast - slow.max(0.0)).abs() < 1e-12, "lambda {lambda}: {fast} vs {slow}");
        }
    }

    #[test]
    fn clarity_scale_invariant() {
        let m = CollectionModel::build(&[ticket("1", "", &[("a", 3), ("b", 1), ("c", 5)])]).unwrap();
        let t1 = ticket("q", "", &[("a", 1), ("c", 2)]);
        let t2 = ticket("q", "", &[("a", 3), ("c", 6)]);
        assert!((clarity(&t1, &m).unwrap() - clarity(&t2, &m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ticket_block_columns() {
        // IEF(e1) = ln(N / df); choose N/df = e^1.5 is awkward, so check against ief() itself.
        let m = CollectionModel::build(&[
            ticket("1", "", &[("e1", 1)]),
            ticket("2", "", &[("x", 1)]),
            ticket("3", "", &[("y", 1)]),
        ])
        .unwrap();
        let t = ticket("q", "a b c d e f g h e1 e1", &[("e1", 2)]);
        let b = ticket_block(&t, &m).unwrap();
        assert_eq!(b[0], 10.0);
        assert_eq!(b[1], clarity(&t, &m).unwrap());
        assert_eq!(b[2], 2.0);
        assert_eq!(b[3], 0.2);
        assert!((b[4] - 3.0f64.ln()).abs() < 1e-15);
        assert_eq!(ticket_block(&t, &m).unwrap(), b);
    }

    #[test]
    fn encode_orders_terms_by_first_occurrence() {
        let m = CollectionModel::build(&[ticket("1", "", &[("a", 1), ("b", 1)])]).unwrap();
        let t = ticket("q", "x b y a b new", &[("a", 1), ("b", 2), ("new", 1)]);
        let q = m.encode(&t);
        let (a, b) = (m.lookup("a"), m.lookup("b"));
        assert_eq!(q.terms, vec![b, a, None]);
        assert_eq!(q.sequence, vec![b, a, b, None]);
        assert_eq!(q.oov, vec![1]);
    }
}
