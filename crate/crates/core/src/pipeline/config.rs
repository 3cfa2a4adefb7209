use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusPaths, GeneratorConfig};
use crate::error::{Error, Result};
use crate::features::BlockMask;
use crate::ltr::{BoostParams, ForestParams};
use crate::text_models::DEFAULT_EMBEDDING_DIM;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub work_dir: PathBuf,
    /// read the corpus from here instead of `<work_dir>/data`
    pub corpus_dir: Option<PathBuf>,
    /// external entity vectors; built from co-occurrence when absent
    pub embeddings_file: Option<PathBuf>,
    /// generator seed
    pub seed: u64,
    pub split_seed: u64,
    pub train_seed: u64,
    pub generator: GeneratorConfig,
    pub neighbors: usize,
    pub negative_ratio: usize,
    pub test_per_length: usize,
    pub embedding_dim: usize,
    pub fidelity_width: usize,
    pub loo_pool: usize,
    pub blocks: String,
    pub forest: ForestParams,
    pub boost: BoostParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            work_dir: PathBuf::from("work"),
            corpus_dir: None,
            embeddings_file: None,
            seed: 42,
            split_seed: 7,
            train_seed: 11,
            generator: GeneratorConfig::default(),
            neighbors: 10,
            negative_ratio: 1,
            test_per_length: 100,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            fidelity_width: 10,
            loo_pool: 50,
            blocks: "T,G,TG,GG".into(),
            forest: ForestParams::default(),
            boost: BoostParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.mask()?;
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        if self.loo_pool == 0 || self.test_per_length == 0 || self.fidelity_width == 0 {
            return Err(Error::Config("loo_pool, test_per_length and fidelity_width must be positive".into()));
        }
        Ok(())
    }

    pub fn mask(&self) -> Result<BlockMask> {
        BlockMask::parse(&self.blocks)
    }

    pub fn paths(&self) -> WorkPaths {
        WorkPaths::new(&self.work_dir, self.corpus_dir.as_deref())
    }
}

/// Artifact locations inside the work directory.
#[derive(Clone, Debug)]
pub struct WorkPaths {
    pub root: PathBuf,
    pub corpus: CorpusPaths,
    pub build: PathBuf,
    pub models: PathBuf,
    pub reports: PathBuf,
}

impl WorkPaths {
    pub fn new(root: &Path, corpus_dir: Option<&Path>) -> Self {
        let data = corpus_dir.map_or_else(|| root.join("data"), Path::to_path_buf);
        WorkPaths {
            root: root.to_path_buf(),
            corpus: CorpusPaths::in_dir(data),
            build: root.join("build"),
            models: root.join("models"),
            reports: root.join("reports"),
        }
    }

    pub fn manifest(&self) -> PathBuf {
        self.build.join("manifest.json")
    }

    pub fn split(&self) -> PathBuf {
        self.build.join("split.json")
    }

    pub fn embeddings(&self) -> PathBuf {
        self.build.join("embeddings.txt")
    }

    pub fn normalization(&self) -> PathBuf {
        self.build.join("normalization.json")
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.models.join(format!("{name}.json"))
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.reports.join("metrics.json")
    }

    pub fn ablation_json(&self) -> PathBuf {
        self.reports.join("ablation.json")
    }
}
