//! Ticket-to-group retrieval and similarity scores.
//!
//! The ticket acts as the query and the group's profile as the document.

use super::collection::{CollectionModel, Query};
use super::embedding::EmbeddingProvider;
use super::profile::{GroupProfile, ProfileSet};
use crate::corpus::{GroupIdx, Ticket};
use crate::error::{Error, Result};

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
pub const SDM_UNIGRAM_WEIGHT: f64 = 0.85;
pub const SDM_ORDERED_WEIGHT: f64 = 0.1;
pub const SDM_UNORDERED_WEIGHT: f64 = 0.05;
pub const SDM_WINDOW: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelevanceScores {
    /// Dirichlet-smoothed query log-likelihood.
    pub qlm: f64,
    pub bm25: f64,
    /// Sequential dependence model score.
    pub sdm: f64,
    /// ln P(g|τ) = ln p(g) + Σ_{e ∈ E_τ} ln p(e|g).
    pub log_p_group: f64,
}

impl RelevanceScores {
    /// P(g|τ); may underflow to zero for very long tickets, use
    /// [`RelevanceScores::log_p_group`] for ranking.
    pub fn p_group(&self) -> f64 {
        self.log_p_group.exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityScores {
    pub cos_ent: f64,
    pub cos_emb: f64,
    pub emb_distance: f64,
}

fn dirichlet(tf: f64, p_collection: f64, length: f64, mu: f64) -> f64 {
    ((tf + mu * p_collection) / (length + mu)).ln()
}

pub(crate) fn relevance_for_query(
    q: &Query,
    profile: &GroupProfile,
    profiles: &ProfileSet,
    collection: &CollectionModel,
) -> RelevanceScores {
    let vocab = collection.vocabulary_size();
    let len = profile.length as f64;
    let mu = profiles.mu;
    let pc = |e: Option<_>| e.map_or_else(|| collection.prob_unseen(), |e| collection.prob(e));

    let mut qlm = 0.0;
    for &(e, c) in &q.known {
        qlm += c as f64 * dirichlet(profile.count(e) as f64, collection.prob(e), len, mu);
    }
    for &c in &q.oov {
        qlm += c as f64 * dirichlet(0.0, collection.prob_unseen(), len, mu);
    }

    let mut bm25 = 0.0;
    if profile.length > 0 {
        let n = profiles.nonempty as f64;
        let norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len / profiles.avg_length);
        for &(e, _) in &q.known {
            let tf = profile.count(e) as f64;
            if tf == 0.0 {
                continue;
            }
            let df = profiles.document_frequency(e) as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            bm25 += idf * tf * (BM25_K1 + 1.0) / (tf + norm);
        }
    }

    let mut unigram = 0.0;
    for &t in &q.terms {
        let tf = t.map_or(0, |e| profile.count(e)) as f64;
        unigram += dirichlet(tf, pc(t), len, mu);
    }
    let positions = profile.positions as f64;
    let mut ordered = 0.0;
    let mut unordered = 0.0;
    for pair in q.terms.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        ordered += dirichlet(profile.ordered_count(a, b) as f64, profiles.ordered_prob(a, b), positions, mu);
        unordered += dirichlet(profile.unordered_count(a, b) as f64, profiles.unordered_prob(a, b), positions, mu);
    }
    let sdm = SDM_UNIGRAM_WEIGHT * unigram + SDM_ORDERED_WEIGHT * ordered + SDM_UNORDERED_WEIGHT * unordered;

    let mut log_p_group = profile.prior.ln();
    for &(e, _) in &q.known {
        log_p_group += profile.prob(Some(e), vocab).ln();
    }
    for _ in &q.oov {
        log_p_group += profile.prob(None, vocab).ln();
    }

    RelevanceScores {
        qlm,
        bm25,
        sdm,
        log_p_group,
    }
}

/// QLM, BM25, SDM and P(g|τ) of a ticket against one group profile.
pub fn relevance_scores(
    ticket: &Ticket,
    group: GroupIdx,
    profiles: &ProfileSet,
    collection: &CollectionModel,
) -> Result<RelevanceScores> {
    let profile = profiles
        .get(group)
        .ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
    Ok(relevance_for_query(&collection.encode(ticket), profile, profiles, collection))
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

pub(crate) fn similarity_for_query(
    q: &Query,
    ticket_vec: &[f64],
    group: GroupIdx,
    profile: &GroupProfile,
    embeddings: &EmbeddingProvider,
) -> SimilarityScores {
    let dot: f64 = q
        .known
        .iter()
        .map(|&(e, c)| c as f64 * profile.count(e) as f64)
        .sum();
    let qn = (q.known.iter().map(|&(_, c)| (c as f64).powi(2)).sum::<f64>()
        + q.oov.iter().map(|&c| (c as f64).powi(2)).sum::<f64>())
    .sqrt();
    let cos_ent = if qn == 0.0 || profile.norm() == 0.0 {
        0.0
    } else {
        (dot / (qn * profile.norm())).clamp(-1.0, 1.0)
    };
    let gv = embeddings.group_vector(group);
    let emb_distance = ticket_vec
        .iter()
        .zip(gv)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    SimilarityScores {
        cos_ent,
        cos_emb: cosine(ticket_vec, gv),
        emb_distance,
    }
}

/// Entity-vector cosine, embedding cosine and embedding distance between a
/// ticket and a group.
pub fn similarity_scores(
    ticket: &Ticket,
    group: GroupIdx,
    embeddings: &EmbeddingProvider,
    profiles: &ProfileSet,
    collection: &CollectionModel,
) -> Result<SimilarityScores> {
    let profile = profiles
        .get(group)
        .ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
    if group.index() >= embeddings.num_groups() {
        return Err(Error::UnknownGroup(group.to_string()));
    }
    let tv = embeddings.ticket_vector(ticket);
    Ok(similarity_for_query(&collection.encode(ticket), &tv, group, profile, embeddings))
}
