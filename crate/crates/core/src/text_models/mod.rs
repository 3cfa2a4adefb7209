//! Entity language models and ticket/group text scores.
//!
//! Everything here is built once from the training corpus and is read-only
//! afterwards; scoring functions take `&self` and can run in parallel.

mod collection;
mod embedding;
mod profile;
mod relevance;

pub use collection::{clarity, clarity_with, ticket_block, CollectionModel, EntityIdx, Query, CLARITY_LAMBDA};
pub use embedding::{EmbeddingProvider, DEFAULT_EMBEDDING_DIM};
pub use profile::{GroupProfile, ProfileSet};
pub(crate) use relevance::{relevance_for_query, similarity_for_query};
pub use relevance::{
    relevance_scores, similarity_scores, RelevanceScores, SimilarityScores, BM25_B, BM25_K1,
    SDM_ORDERED_WEIGHT, SDM_UNIGRAM_WEIGHT, SDM_UNORDERED_WEIGHT, SDM_WINDOW,
};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Collection model, one profile per registry group, and entity embeddings.
#[derive(Clone, Debug)]
pub struct TextModels {
    pub collection: CollectionModel,
    pub profiles: ProfileSet,
    pub embeddings: EmbeddingProvider,
}

/// Builds all text models from a labelled corpus, with PPMI embeddings.
pub fn build_models(corpus: &Corpus, embedding_dim: usize, seed: u64) -> Result<TextModels> {
    let collection = CollectionModel::build(corpus.tickets())?;
    let embeddings = EmbeddingProvider::from_cooccurrence(corpus.tickets(), embedding_dim, seed)?;
    build_models_with(corpus, collection, embeddings)
}

/// Builds profiles for a corpus around an existing collection model and
/// embedding provider (e.g. one loaded from a file).
pub fn build_models_with(
    corpus: &Corpus,
    collection: CollectionModel,
    embeddings: EmbeddingProvider,
) -> Result<TextModels> {
    if corpus.records().is_empty() {
        return Err(Error::Empty("corpus has no routing records".into()));
    }
    let profiles = ProfileSet::build(corpus, &collection)?;
    let embeddings = embeddings.with_groups(corpus)?;
    Ok(TextModels {
        collection,
        profiles,
        embeddings,
    })
}
