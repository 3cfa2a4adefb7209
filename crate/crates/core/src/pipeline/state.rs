use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use crate::corpus::{Corpus, GroupIdx, RoutingRecord, Ticket};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, NormalizationTable};
use crate::ltr::{build_training_set, Dataset};
use crate::root_ranker::{generate_candidates, CandidateSet, TicketIndex};
use crate::routing_sim::{split_test_sets, CandidatePools, TestSplit};
use crate::text_models::{build_models_with, CollectionModel, EmbeddingProvider};

/// Named test set with its resolved tickets.
pub type NamedTestSet<'a> = (String, Vec<(&'a Ticket, &'a RoutingRecord)>);

pub const POINTWISE_LABEL: &str = "pointwise";
pub const PAIRWISE_LABEL: &str = "pairwise";
pub const HUMAN_LABEL: &str = "human";

/// Build inputs recorded so later stages can detect stale artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Manifest {
    pub corpus_sha256: String,
    pub split_seed: u64,
    pub train_seed: u64,
    pub test_per_length: usize,
    pub neighbors: usize,
    pub negative_ratio: usize,
    pub embedding_dim: usize,
    pub embeddings_file: Option<String>,
}

impl Manifest {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        let mut h = Sha256::new();
        for p in cfg.paths().corpus.all() {
            h.update(read(p, "gen-data")?.as_bytes());
            h.update([0u8]);
        }
        Ok(Manifest {
            corpus_sha256: h.finalize().iter().map(|b| format!("{b:02x}")).collect(),
            split_seed: cfg.split_seed,
            train_seed: cfg.train_seed,
            test_per_length: cfg.test_per_length,
            neighbors: cfg.neighbors,
            negative_ratio: cfg.negative_ratio,
            embedding_dim: cfg.embedding_dim,
            embeddings_file: cfg.embeddings_file.as_ref().map(|p| p.display().to_string()),
        })
    }
}

/// Reads an artifact, naming the command that produces it when absent.
pub(crate) fn read(path: &Path, command: &'static str) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingArtifact {
            path: path.to_path_buf(),
            command,
        });
    }
    Ok(fs::read_to_string(path)?)
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Everything derived from the corpus and split, shared by train and
/// evaluation stages.
pub struct BuiltState {
    pub corpus: Corpus,
    pub split: TestSplit,
    pub train: Corpus,
    pub extractor: FeatureExtractor,
    pub index: TicketIndex,
    /// candidate set of every routed ticket at the configured neighbor count
    pub candidates: HashMap<String, CandidateSet>,
}

impl BuiltState {
    pub fn assemble(cfg: &PipelineConfig, corpus: Corpus, split: TestSplit, embeddings: EmbeddingProvider) -> Result<Self> {
        let train = corpus.subset(split.train.iter().map(String::as_str))?;
        let collection = CollectionModel::build(train.tickets())?;
        let text = build_models_with(&train, collection, embeddings)?;
        let extractor = FeatureExtractor::build(&train, text)?;
        let index = TicketIndex::build(&train)?;
        let mut candidates = HashMap::new();
        for (t, _) in corpus.routed() {
            let c = generate_candidates(t, cfg.neighbors, &extractor.networks.root, &index, &extractor.registry)?;
            candidates.insert(t.id.clone(), c);
        }
        Ok(BuiltState {
            corpus,
            split,
            train,
            extractor,
            index,
            candidates,
        })
    }

    /// Splits the corpus and derives embeddings from the training tickets
    /// (or the configured vector file).
    pub fn from_corpus(cfg: &PipelineConfig, corpus: Corpus) -> Result<Self> {
        let split = split_test_sets(&corpus, cfg.test_per_length, cfg.split_seed)?;
        let embeddings = match &cfg.embeddings_file {
            Some(p) => EmbeddingProvider::parse(&read(p, "build")?, &p.display().to_string())?,
            None => {
                let train = corpus.subset(split.train.iter().map(String::as_str))?;
                EmbeddingProvider::from_cooccurrence(train.tickets(), cfg.embedding_dim, cfg.train_seed)?
            }
        };
        Self::assemble(cfg, corpus, split, embeddings)
    }

    /// Reloads the state from `build` artifacts.
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let paths = cfg.paths();
        let manifest: Manifest = serde_json::from_str(&read(&paths.manifest(), "build")?)?;
        if manifest != Manifest::new(cfg)? {
            return Err(Error::Config(
                "corpus or build settings changed since the last build; run `build` again".into(),
            ));
        }
        let corpus = Corpus::load(&paths.corpus)?;
        let split: TestSplit = serde_json::from_str(&read(&paths.split(), "build")?)?;
        let emb_path = paths.embeddings();
        let embeddings = EmbeddingProvider::parse(&read(&emb_path, "build")?, &emb_path.display().to_string())?;
        Self::assemble(cfg, corpus, split, embeddings)
    }

    pub fn pools(&self) -> CandidatePools {
        CandidatePools::PerTicket(self.candidates.iter().map(|(k, v)| (k.clone(), v.members.clone())).collect())
    }

    pub fn test_sets(&self) -> Result<Vec<NamedTestSet<'_>>> {
        self.split
            .test_sets
            .iter()
            .map(|(name, ids)| {
                let pairs = ids
                    .iter()
                    .map(|id| {
                        let t = self.corpus.ticket(id).ok_or_else(|| Error::Validation(format!("unknown test ticket `{id}`")))?;
                        let r = self.corpus.record_for(id).ok_or_else(|| Error::Validation(format!("test ticket `{id}` has no routing")))?;
                        Ok((t, r))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((name.clone(), pairs))
            })
            .collect()
    }

    /// Negative pools for training records: the ticket's candidate set, or
    /// the whole registry when that is too small.
    pub fn universes(&self, ratio: usize) -> Vec<Vec<GroupIdx>> {
        let all: Vec<GroupIdx> = self.train.registry().indices().collect();
        self.train
            .records()
            .iter()
            .map(|r| {
                let members = &self.candidates[&r.ticket_id].members;
                let free = members.iter().filter(|g| !r.sequence.contains(g)).count();
                if free >= ratio * r.len() {
                    members.clone()
                } else {
                    all.clone()
                }
            })
            .collect()
    }

    pub fn training_set(&self, cfg: &PipelineConfig) -> Result<(Dataset, NormalizationTable)> {
        build_training_set(
            &self.train,
            &self.universes(cfg.negative_ratio),
            &self.extractor,
            cfg.negative_ratio,
            cfg.train_seed,
        )
    }
}
