use std::collections::HashMap;

use super::collection::{CollectionModel, EntityIdx};
use super::relevance::SDM_WINDOW;
use crate::corpus::{Corpus, GroupIdx};
use crate::error::Result;

/// The aggregated entity multiset of every ticket a group resolved.
#[derive(Clone, Debug, Default)]
pub struct GroupProfile {
    pub group: GroupIdx,
    pub counts: HashMap<EntityIdx, u32>,
    /// Total entity occurrences in the profile.
    pub length: u64,
    pub resolved: usize,
    /// (resolved + 1) / (|T| + |G|)
    pub prior: f64,
    pub(crate) ordered: HashMap<(EntityIdx, EntityIdx), u32>,
    pub(crate) unordered: HashMap<(EntityIdx, EntityIdx), u32>,
    pub(crate) positions: u64,
    pub(crate) norm: f64,
}

impl GroupProfile {
    pub fn count(&self, e: EntityIdx) -> u32 {
        self.counts.get(&e).copied().unwrap_or(0)
    }

    /// Add-one smoothed P(e|g) over a vocabulary of size `vocab`.
    pub fn prob(&self, e: Option<EntityIdx>, vocab: usize) -> f64 {
        let c = e.map_or(0, |e| self.count(e));
        (c as f64 + 1.0) / (self.length as f64 + vocab as f64)
    }

    /// Euclidean norm of the entity count vector.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

fn unordered_key(a: EntityIdx, b: EntityIdx) -> (EntityIdx, EntityIdx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn count_pairs(
    seq: &[Option<EntityIdx>],
    ordered: &mut HashMap<(EntityIdx, EntityIdx), u32>,
    unordered: &mut HashMap<(EntityIdx, EntityIdx), u32>,
) {
    for i in 0..seq.len() {
        let Some(a) = seq[i] else { continue };
        if let Some(Some(b)) = seq.get(i + 1) {
            *ordered.entry((a, *b)).or_insert(0) += 1;
        }
        for item in seq.iter().take((i + SDM_WINDOW).min(seq.len())).skip(i + 1) {
            if let Some(b) = *item {
                if a != b {
                    *unordered.entry(unordered_key(a, b)).or_insert(0) += 1;
                }
            }
        }
    }
}

/// Profiles for every registry group, plus the collection statistics the
/// retrieval scores need when treating profiles as documents.
#[derive(Clone, Debug)]
pub struct ProfileSet {
    profiles: Vec<GroupProfile>,
    vocab: usize,
    /// Dirichlet prior: mean length of non-empty profiles.
    pub mu: f64,
    /// BM25 average document length over non-empty profiles.
    pub avg_length: f64,
    pub nonempty: usize,
    df: HashMap<EntityIdx, u32>,
    ordered_cf: HashMap<(EntityIdx, EntityIdx), u32>,
    unordered_cf: HashMap<(EntityIdx, EntityIdx), u32>,
    total_positions: u64,
}

impl ProfileSet {
    pub fn build(corpus: &Corpus, collection: &CollectionModel) -> Result<Self> {
        let n_groups = corpus.registry().len();
        let mut profiles: Vec<GroupProfile> = corpus
            .registry()
            .indices()
            .map(|g| GroupProfile {
                group: g,
                ..GroupProfile::default()
            })
            .collect();
        for (ticket, record) in corpus.routed() {
            let p = &mut profiles[record.resolver().index()];
            p.resolved += 1;
            let q = collection.encode(ticket);
            for &(e, c) in &q.known {
                *p.counts.entry(e).or_insert(0) += c;
                p.length += c as u64;
            }
            p.length += q.oov.iter().map(|&c| c as u64).sum::<u64>();
            p.positions += q.sequence.len() as u64;
            count_pairs(&q.sequence, &mut p.ordered, &mut p.unordered);
        }
        let denom = (corpus.records().len() + n_groups) as f64;
        let mut df = HashMap::new();
        let mut ordered_cf = HashMap::new();
        let mut unordered_cf = HashMap::new();
        let mut total_positions = 0;
        let mut nonempty = 0;
        let mut length_sum = 0u64;
        for p in &mut profiles {
            p.prior = (p.resolved as f64 + 1.0) / denom;
            p.norm = p.counts.values().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
            if p.length > 0 {
                nonempty += 1;
                length_sum += p.length;
            }
            for &e in p.counts.keys() {
                *df.entry(e).or_insert(0) += 1;
            }
            for (k, &c) in &p.ordered {
                *ordered_cf.entry(*k).or_insert(0) += c;
            }
            for (k, &c) in &p.unordered {
                *unordered_cf.entry(*k).or_insert(0) += c;
            }
            total_positions += p.positions;
        }
        let mean = if nonempty > 0 { length_sum as f64 / nonempty as f64 } else { 1.0 };
        Ok(ProfileSet {
            profiles,
            vocab: collection.vocabulary_size(),
            mu: mean.max(1.0),
            avg_length: mean.max(1.0),
            nonempty,
            df,
            ordered_cf,
            unordered_cf,
            total_positions,
        })
    }

    pub fn get(&self, g: GroupIdx) -> Option<&GroupProfile> {
        self.profiles.get(g.index())
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupProfile> {
        self.profiles.iter()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab
    }

    /// Number of non-empty profiles containing `e`.
    pub fn document_frequency(&self, e: EntityIdx) -> u32 {
        self.df.get(&e).copied().unwrap_or(0)
    }

    pub(crate) fn ordered_prob(&self, a: Option<EntityIdx>, b: Option<EntityIdx>) -> f64 {
        let cf = match (a, b) {
            (Some(a), Some(b)) => self.ordered_cf.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        };
        (cf as f64 + 1.0) / (self.total_positions as f64 + 1.0)
    }

    pub(crate) fn unordered_prob(&self, a: Option<EntityIdx>, b: Option<EntityIdx>) -> f64 {
        let cf = match (a, b) {
            (Some(a), Some(b)) => self.unordered_cf.get(&unordered_key(a, b)).copied().unwrap_or(0),
            _ => 0,
        };
        (cf as f64 + 1.0) / (self.total_positions as f64 + 1.0)
    }
}

impl GroupProfile {
    pub(crate) fn ordered_count(&self, a: Option<EntityIdx>, b: Option<EntityIdx>) -> u32 {
        match (a, b) {
            (Some(a), Some(b)) => self.ordered.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub(crate) fn unordered_count(&self, a: Option<EntityIdx>, b: Option<EntityIdx>) -> u32 {
        match (a, b) {
            (Some(a), Some(b)) => self.unordered.get(&unordered_key(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Corpus {
        Corpus::parse(
            concat!(
                "{\"id\":\"t1\",\"text\":\"e1 e2 e1 e1\",\"entities\":[[\"e1\",3],[\"e2\",1]]}\n",
                "{\"id\":\"t2\",\"text\":\"e3\",\"entities\":[[\"e3\",1]]}\n",
            ),
            "{\"ticket_id\":\"t1\",\"sequence\":[\"A\"]}\n{\"ticket_id\":\"t2\",\"sequence\":[\"A\",\"B\"]}\n",
            "A\nB\nC\n",
        )
        .unwrap()
    }

    #[test]
    fn add_one_group_distribution() {
        let c = corpus();
        let m = CollectionModel::build(c.tickets()).unwrap();
        let ps = ProfileSet::build(&c, &m).unwrap();
        let a = ps.get(GroupIdx(0)).unwrap();
        let v = m.vocabulary_size();
        assert_eq!(v, 3);
        assert_eq!(a.length, 4);
        assert!((a.prob(m.lookup("e1"), v) - 4.0 / 7.0).abs() < 1e-15);
        let total: f64 = m.names().iter().map(|n| a.prob(m.lookup(n), v)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        // C resolved nothing: uniform
        let empty = ps.get(GroupIdx(2)).unwrap();
        assert_eq!(empty.length, 0);
        assert!((empty.prob(m.lookup("e2"), v) - 1.0 / 3.0).abs() < 1e-15);
        // priors (count + 1) / (|T| + |G|)
        assert!((a.prior - 2.0 / 5.0).abs() < 1e-15);
        assert!((empty.prior - 1.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn bigram_counts() {
        let c = corpus();
        let m = CollectionModel::build(c.tickets()).unwrap();
        let ps = ProfileSet::build(&c, &m).unwrap();
        let a = ps.get(GroupIdx(0)).unwrap();
        let (e1, e2) = (m.lookup("e1"), m.lookup("e2"));
        assert_eq!(a.ordered_count(e1, e2), 1);
        assert_eq!(a.ordered_count(e2, e1), 1);
        assert_eq!(a.ordered_count(e1, e1), 1);
        // window pairs between e1 and e2: (0,1), (1,2), (1,3)
        assert_eq!(a.unordered_count(e1, e2), 3);
        assert_eq!(a.unordered_count(e2, e1), 3);
    }
}
