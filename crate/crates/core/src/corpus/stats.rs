use std::collections::BTreeMap;

use serde::Serialize;

use super::model::Corpus;
use crate::error::{Error, Result};

/// Size distributions of a corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    /// ticket length (tokens) -> ticket count
    pub ticket_length: BTreeMap<usize, usize>,
    /// routing sequence length -> record count
    pub routing_length: BTreeMap<usize, usize>,
    /// group id -> tickets it resolved (groups that resolved none are absent)
    pub resolved: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus has no tickets".into()));
    }
    let mut ticket_length = BTreeMap::new();
    for t in corpus.tickets() {
        *ticket_length.entry(t.length).or_insert(0) += 1;
    }
    let mut routing_length = BTreeMap::new();
    let mut resolved = BTreeMap::new();
    for r in corpus.records() {
        *routing_length.entry(r.len()).or_insert(0) += 1;
        *resolved
            .entry(corpus.registry().id(r.resolver()).to_string())
            .or_insert(0) += 1;
    }
    Ok(CorpusStats {
        ticket_length,
        routing_length,
        resolved,
    })
}
